//! Specification-variant and spatial-scale sensitivity analysis:
//! per-unit score transitions between a base index and its variants, and
//! stability summaries over whole variant sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{broadcast_parent, Crosswalk, SpatialFrame};
use crate::index::{rank_index, IndexSpec, RankedIndex};

/// Direction of a quintile-score transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increase,
    Decrease,
    NoChange,
}

impl Direction {
    pub fn of(base_quintile: u8, variant_quintile: u8) -> Direction {
        match variant_quintile.cmp(&base_quintile) {
            std::cmp::Ordering::Greater => Direction::Increase,
            std::cmp::Ordering::Less => Direction::Decrease,
            std::cmp::Ordering::Equal => Direction::NoChange,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Increase => write!(f, "increase"),
            Direction::Decrease => write!(f, "decrease"),
            Direction::NoChange => write!(f, "no-change"),
        }
    }
}

/// One unit's scores under the base and under one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScore {
    pub unit_id: String,
    pub base_percentile: f64,
    pub variant_percentile: f64,
    pub base_quintile: u8,
    pub variant_quintile: u8,
}

/// A base index paired with one variant over the same unit set. Units
/// unscored under either side are excluded from the pairing and logged.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub base_label: String,
    pub variant_label: String,
    pub scale: String,
    /// Ascending by unit id.
    pub pairing: Vec<PairedScore>,
    /// (unit_id, reason) for every unit left out of the pairing.
    pub excluded: Vec<(String, String)>,
}

impl VariantRun {
    /// Pair two rankings of the same frame. The full unit sets must match;
    /// units missing a score on either side are logged, not errors.
    pub fn from_indices(base: &RankedIndex, variant: &RankedIndex) -> Result<VariantRun> {
        if base.scale != variant.scale {
            return Err(Error::Scale {
                expected: base.scale.clone(),
                got: variant.scale.clone(),
            });
        }
        let base_ids: BTreeSet<&str> = base.entries.iter().map(|e| e.unit_id.as_str()).collect();
        let variant_ids: BTreeSet<&str> =
            variant.entries.iter().map(|e| e.unit_id.as_str()).collect();
        if base_ids != variant_ids {
            return Err(Error::UnitSet(format!(
                "base `{}` and variant `{}` rank different unit sets",
                base.spec_name, variant.spec_name
            )));
        }

        let by_id: BTreeMap<&str, &crate::index::RankedUnit> = variant
            .entries
            .iter()
            .map(|e| (e.unit_id.as_str(), e))
            .collect();

        let mut pairing = Vec::new();
        let mut excluded = Vec::new();
        for entry in &base.entries {
            let other = by_id[entry.unit_id.as_str()];
            match (
                entry.percentile,
                entry.quintile,
                other.percentile,
                other.quintile,
            ) {
                (Some(bp), Some(bq), Some(vp), Some(vq)) => pairing.push(PairedScore {
                    unit_id: entry.unit_id.clone(),
                    base_percentile: bp,
                    variant_percentile: vp,
                    base_quintile: bq,
                    variant_quintile: vq,
                }),
                (None, ..) => excluded.push((entry.unit_id.clone(), "missing_base".to_string())),
                _ => excluded.push((entry.unit_id.clone(), "missing_variant".to_string())),
            }
        }
        pairing.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));

        Ok(VariantRun {
            base_label: base.spec_name.clone(),
            variant_label: variant.spec_name.clone(),
            scale: base.scale.clone(),
            pairing,
            excluded,
        })
    }

    /// The full unit universe this run covers: paired plus excluded ids.
    pub fn universe(&self) -> BTreeSet<&str> {
        self.pairing
            .iter()
            .map(|p| p.unit_id.as_str())
            .chain(self.excluded.iter().map(|(id, _)| id.as_str()))
            .collect()
    }
}

/// One unit's classified transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionRecord {
    pub unit_id: String,
    pub direction: Direction,
    pub base_quintile: u8,
    pub variant_quintile: u8,
}

/// Evaluate the base spec once and each variant spec against it on the
/// same frame. Output order follows the input variant order.
pub fn run_variants(
    base_spec: &IndexSpec,
    variant_specs: &[IndexSpec],
    frame: &SpatialFrame,
) -> Result<Vec<VariantRun>> {
    let base = rank_index(base_spec, frame).map_err(|e| e.for_spec(&base_spec.name))?;
    let mut runs = Vec::with_capacity(variant_specs.len());
    for spec in variant_specs {
        let variant = rank_index(spec, frame).map_err(|e| e.for_spec(&spec.name))?;
        runs.push(VariantRun::from_indices(&base, &variant)?);
    }
    Ok(runs)
}

/// Classify every paired unit's quintile transition.
pub fn classify_transitions(run: &VariantRun) -> Vec<TransitionRecord> {
    run.pairing
        .iter()
        .map(|p| TransitionRecord {
            unit_id: p.unit_id.clone(),
            direction: Direction::of(p.base_quintile, p.variant_quintile),
            base_quintile: p.base_quintile,
            variant_quintile: p.variant_quintile,
        })
        .collect()
}

/// Per-variant transition counts; the three counts always sum to `n`.
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseStability {
    pub variant: String,
    pub n: usize,
    pub unchanged: usize,
    pub increased: usize,
    pub decreased: usize,
    pub frac_unchanged: f64,
    pub frac_increased: f64,
    pub frac_decreased: f64,
}

/// A unit that moved at least `jump_threshold` quintiles under a variant.
#[derive(Debug, Clone, Serialize)]
pub struct FlaggedJump {
    pub variant: String,
    pub unit_id: String,
    pub base_quintile: u8,
    pub variant_quintile: u8,
}

/// Stability of the base index across a set of variant runs.
#[derive(Debug, Clone, Serialize)]
pub struct StabilitySummary {
    pub base: String,
    /// Units paired under every variant; the denominator for the
    /// all-variants fraction.
    pub n_units: usize,
    pub unchanged_all_variants: usize,
    pub frac_unchanged_all_variants: f64,
    /// Units dropped from the all-variants count because some variant
    /// left them unscored.
    pub excluded_units: Vec<String>,
    pub pairwise: Vec<PairwiseStability>,
    pub flagged_jumps: Vec<FlaggedJump>,
    pub jump_threshold: u8,
}

/// Summarize stability across runs that share a base and unit universe.
///
/// `jump_threshold` flags units whose quintile moved by at least that many
/// categories under some variant; 2 is the conventional default.
pub fn stability_summary(runs: &[VariantRun], jump_threshold: u8) -> Result<StabilitySummary> {
    let first = runs.first().ok_or_else(|| {
        Error::InsufficientData("stability summary needs at least one run".to_string())
    })?;
    let universe = first.universe();
    for run in runs {
        if run.base_label != first.base_label {
            return Err(Error::UnitSet(format!(
                "runs mix bases `{}` and `{}`",
                first.base_label, run.base_label
            )));
        }
        if run.universe() != universe {
            return Err(Error::UnitSet(format!(
                "run `{}` covers a different unit universe",
                run.variant_label
            )));
        }
    }

    let mut pairwise = Vec::with_capacity(runs.len());
    let mut flagged = Vec::new();
    let mut in_all: BTreeSet<&str> = first.pairing.iter().map(|p| p.unit_id.as_str()).collect();
    let mut unchanged_everywhere: BTreeSet<&str> = in_all.clone();

    for run in runs {
        let mut unchanged = 0usize;
        let mut increased = 0usize;
        let mut decreased = 0usize;
        let paired_ids: BTreeSet<&str> = run.pairing.iter().map(|p| p.unit_id.as_str()).collect();
        for p in &run.pairing {
            match Direction::of(p.base_quintile, p.variant_quintile) {
                Direction::NoChange => unchanged += 1,
                Direction::Increase => {
                    increased += 1;
                    unchanged_everywhere.remove(p.unit_id.as_str());
                }
                Direction::Decrease => {
                    decreased += 1;
                    unchanged_everywhere.remove(p.unit_id.as_str());
                }
            }
            let delta = (i16::from(p.variant_quintile) - i16::from(p.base_quintile)).unsigned_abs();
            if jump_threshold > 0 && delta >= u16::from(jump_threshold) {
                flagged.push(FlaggedJump {
                    variant: run.variant_label.clone(),
                    unit_id: p.unit_id.clone(),
                    base_quintile: p.base_quintile,
                    variant_quintile: p.variant_quintile,
                });
            }
        }
        in_all.retain(|id| paired_ids.contains(id));
        let n = run.pairing.len();
        let frac = |count: usize| {
            if n == 0 {
                0.0
            } else {
                count as f64 / n as f64
            }
        };
        pairwise.push(PairwiseStability {
            variant: run.variant_label.clone(),
            n,
            unchanged,
            increased,
            decreased,
            frac_unchanged: frac(unchanged),
            frac_increased: frac(increased),
            frac_decreased: frac(decreased),
        });
    }

    unchanged_everywhere.retain(|id| in_all.contains(id));
    let excluded_units: Vec<String> = universe
        .iter()
        .filter(|id| !in_all.contains(*id))
        .map(|id| id.to_string())
        .collect();

    let n_units = in_all.len();
    let unchanged_all = unchanged_everywhere.len();
    Ok(StabilitySummary {
        base: first.base_label.clone(),
        n_units,
        unchanged_all_variants: unchanged_all,
        frac_unchanged_all_variants: if n_units == 0 {
            0.0
        } else {
            unchanged_all as f64 / n_units as f64
        },
        excluded_units,
        pairwise,
        flagged_jumps: flagged,
        jump_threshold,
    })
}

/// Re-derive an index at a finer scale and compare it against the coarse
/// ranking broadcast down to the fine units.
///
/// The base side assigns every fine unit its parent's percentile and
/// quintile unchanged; the variant side re-evaluates and re-ranks the spec
/// among the fine units. Attributes unavailable at the fine scale can be
/// broadcast from the coarse frame by naming them in
/// `broadcast_attributes`.
pub fn scale_sensitivity(
    spec: &IndexSpec,
    fine_frame: &SpatialFrame,
    crosswalk: &Crosswalk,
    coarse_index: &RankedIndex,
    coarse_frame: Option<&SpatialFrame>,
    broadcast_attributes: &[String],
) -> Result<VariantRun> {
    if crosswalk.source_scale() != fine_frame.scale() {
        return Err(Error::Scale {
            expected: fine_frame.scale().to_string(),
            got: crosswalk.source_scale().to_string(),
        });
    }
    if crosswalk.target_scale() != coarse_index.scale {
        return Err(Error::Scale {
            expected: coarse_index.scale.clone(),
            got: crosswalk.target_scale().to_string(),
        });
    }
    for id in fine_frame.unit_ids() {
        if crosswalk.target_of(id).is_none() {
            return Err(Error::MissingParent(id.to_string()));
        }
    }

    // pull coarse-only attributes down to the fine frame before ranking
    let mut frame = fine_frame.clone();
    if !broadcast_attributes.is_empty() {
        let coarse = coarse_frame.ok_or_else(|| {
            Error::Spec("broadcast_attributes requires the coarse frame".to_string())
        })?;
        if coarse.scale() != coarse_index.scale {
            return Err(Error::Scale {
                expected: coarse_index.scale.clone(),
                got: coarse.scale().to_string(),
            });
        }
        for attribute in broadcast_attributes {
            let column = coarse.attribute(attribute)?;
            let parent_values: BTreeMap<String, Option<f64>> = coarse
                .unit_ids()
                .zip(column.iter().copied())
                .map(|(id, v)| (id.to_string(), v))
                .collect();
            let broadcast = broadcast_parent(&parent_values, crosswalk)?;
            let fine_column: Vec<Option<f64>> = frame
                .unit_ids()
                .map(|id| broadcast.get(id).copied().flatten())
                .collect();
            frame = frame.with_attribute(attribute, fine_column)?;
        }
    }

    let variant = rank_index(spec, &frame).map_err(|e| e.for_spec(&spec.name))?;

    let coarse_by_id: BTreeMap<&str, &crate::index::RankedUnit> = coarse_index
        .entries
        .iter()
        .map(|e| (e.unit_id.as_str(), e))
        .collect();

    let mut pairing = Vec::new();
    let mut excluded = Vec::new();
    for entry in &variant.entries {
        let (parent, _) = crosswalk
            .target_of(&entry.unit_id)
            .expect("checked: every fine unit mapped");
        let parent_entry = coarse_by_id
            .get(parent)
            .ok_or_else(|| Error::MissingParent(parent.to_string()))?;
        match (
            parent_entry.percentile,
            parent_entry.quintile,
            entry.percentile,
            entry.quintile,
        ) {
            (Some(bp), Some(bq), Some(vp), Some(vq)) => pairing.push(PairedScore {
                unit_id: entry.unit_id.clone(),
                base_percentile: bp,
                variant_percentile: vp,
                base_quintile: bq,
                variant_quintile: vq,
            }),
            (None, ..) | (_, None, ..) => {
                excluded.push((entry.unit_id.clone(), "missing_base".to_string()))
            }
            _ => excluded.push((entry.unit_id.clone(), "missing_variant".to_string())),
        }
    }
    pairing.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));

    Ok(VariantRun {
        base_label: format!("{}@{}", coarse_index.spec_name, coarse_index.scale),
        variant_label: format!("{}@{}", spec.name, fine_frame.scale()),
        scale: fine_frame.scale().to_string(),
        pairing,
        excluded,
    })
}
