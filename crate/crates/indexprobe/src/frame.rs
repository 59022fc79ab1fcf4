//! Spatial units, attribute frames, and crosswalks between scales.
//!
//! A [`SpatialFrame`] holds one scale's worth of units (census tracts,
//! neighborhoods, zipcode tabulation areas, locality service areas, ...)
//! together with named numeric attribute columns. Missing cells are kept
//! as missing; they are never coerced to zero. A [`Crosswalk`] is a
//! resolved many-to-one mapping from a finer scale onto a coarser one,
//! built by keeping each source's highest-overlap target.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// One spatial unit within a frame. The scale lives on the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialUnit {
    pub id: String,
    /// Population count when the dataset carries one. `None` both when the
    /// frame has no population column and when this unit's cell is empty.
    pub population: Option<f64>,
}

/// An attribute table for the units of a single spatial scale.
///
/// Units are kept sorted ascending by id, so every derived output is
/// independent of input row order. Immutable once built.
#[derive(Debug, Clone)]
pub struct SpatialFrame {
    scale: String,
    units: Vec<SpatialUnit>,
    lookup: HashMap<String, usize>,
    attributes: BTreeMap<String, Vec<Option<f64>>>,
    has_population: bool,
}

/// A raw record destined for a frame: id, optional population, attribute cells.
#[derive(Debug, Clone)]
pub struct FrameRow {
    pub id: String,
    pub population: Option<f64>,
    /// One entry per attribute, in the frame's attribute declaration order.
    pub values: Vec<Option<f64>>,
}

impl SpatialFrame {
    /// Build a frame from parsed rows. `attribute_names` gives the column
    /// names corresponding to each row's `values` slots; `has_population`
    /// states whether the dataset carries a population column at all.
    pub fn build(
        scale: &str,
        attribute_names: &[String],
        rows: Vec<FrameRow>,
        has_population: bool,
    ) -> Result<SpatialFrame> {
        let mut seen: HashMap<String, usize> = HashMap::new();
        for row in &rows {
            if seen.insert(row.id.clone(), 0).is_some() {
                return Err(Error::DuplicateUnit {
                    scale: scale.to_string(),
                    id: row.id.clone(),
                });
            }
            if row.values.len() != attribute_names.len() {
                return Err(Error::Schema(format!(
                    "row `{}` has {} attribute cells, expected {}",
                    row.id,
                    row.values.len(),
                    attribute_names.len()
                )));
            }
            if let Some(p) = row.population {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::Schema(format!(
                        "unit `{}`: population {} is not a nonnegative count",
                        row.id, p
                    )));
                }
            }
        }

        let mut sorted = rows;
        sorted.sort_by(|a, b| a.id.cmp(&b.id));

        let mut units = Vec::with_capacity(sorted.len());
        let mut columns: Vec<Vec<Option<f64>>> =
            vec![Vec::with_capacity(sorted.len()); attribute_names.len()];
        for row in sorted {
            units.push(SpatialUnit {
                id: row.id,
                population: if has_population { row.population } else { None },
            });
            for (slot, value) in row.values.into_iter().enumerate() {
                columns[slot].push(value);
            }
        }

        let lookup = units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.id.clone(), i))
            .collect();
        let mut attributes = BTreeMap::new();
        for (name, column) in attribute_names.iter().zip(columns) {
            if attributes.insert(name.clone(), column).is_some() {
                return Err(Error::Schema(format!("attribute `{name}` declared twice")));
            }
        }

        Ok(SpatialFrame {
            scale: scale.to_string(),
            units,
            lookup,
            attributes,
            has_population,
        })
    }

    pub fn scale(&self) -> &str {
        &self.scale
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[SpatialUnit] {
        &self.units
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|u| u.id.as_str())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn has_attribute(&self, name: &str) -> bool {
        self.attributes.contains_key(name)
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(|k| k.as_str())
    }

    /// Attribute column aligned to unit order, or a schema error naming it.
    pub fn attribute(&self, name: &str) -> Result<&[Option<f64>]> {
        self.attributes
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| {
                Error::Schema(format!(
                    "no attribute `{}` at scale `{}`",
                    name, self.scale
                ))
            })
    }

    pub fn has_population(&self) -> bool {
        self.has_population
    }

    /// Population values aligned to unit order. Errors when the dataset
    /// declared no population column.
    pub fn populations(&self) -> Result<Vec<Option<f64>>> {
        if !self.has_population {
            return Err(Error::Schema(format!(
                "frame at scale `{}` has no population column",
                self.scale
            )));
        }
        Ok(self.units.iter().map(|u| u.population).collect())
    }

    /// A column usable as aggregation weights: a declared attribute first,
    /// falling back to the population column under the name `population`.
    pub fn weight_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        if let Ok(col) = self.attribute(name) {
            return Ok(col.to_vec());
        }
        if name == "population" && self.has_population {
            return self.populations();
        }
        Err(Error::Schema(format!(
            "no weight column `{}` at scale `{}`",
            name, self.scale
        )))
    }

    /// Restrict to units with population > 0. Units with a missing
    /// population cell are dropped too: no count, no inclusion.
    pub fn filter_populated(&self) -> Result<SpatialFrame> {
        if !self.has_population {
            return Err(Error::Schema(format!(
                "frame at scale `{}` has no population column",
                self.scale
            )));
        }
        let keep: Vec<usize> = self
            .units
            .iter()
            .enumerate()
            .filter(|(_, u)| matches!(u.population, Some(p) if p > 0.0))
            .map(|(i, _)| i)
            .collect();
        Ok(self.retain_rows(&keep))
    }

    fn retain_rows(&self, keep: &[usize]) -> SpatialFrame {
        let units: Vec<SpatialUnit> = keep.iter().map(|&i| self.units[i].clone()).collect();
        let attributes = self
            .attributes
            .iter()
            .map(|(name, col)| {
                (
                    name.clone(),
                    keep.iter().map(|&i| col[i]).collect::<Vec<_>>(),
                )
            })
            .collect();
        let lookup = units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.id.clone(), i))
            .collect();
        SpatialFrame {
            scale: self.scale.clone(),
            units,
            lookup,
            attributes,
            has_population: self.has_population,
        }
    }

    /// A copy of this frame with one attribute column added or replaced.
    /// `values` must be aligned to unit order.
    pub fn with_attribute(&self, name: &str, values: Vec<Option<f64>>) -> Result<SpatialFrame> {
        if values.len() != self.units.len() {
            return Err(Error::Schema(format!(
                "attribute `{}` has {} values for {} units",
                name,
                values.len(),
                self.units.len()
            )));
        }
        let mut frame = self.clone();
        frame.attributes.insert(name.to_string(), values);
        Ok(frame)
    }
}

/// An unresolved candidate link between scales, weighted by spatial overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLink {
    pub source_id: String,
    pub target_id: String,
    pub overlap: f64,
}

/// A resolved many-to-one mapping between two scales. Each source id maps
/// to exactly one target; the stored weight is the winning overlap.
#[derive(Debug, Clone)]
pub struct Crosswalk {
    source_scale: String,
    target_scale: String,
    links: BTreeMap<String, (String, f64)>,
}

impl Crosswalk {
    /// Keep each source's highest-overlap target. Ties break to the
    /// lexicographically smallest target id; a source whose links are all
    /// zero overlap cannot be resolved.
    pub fn resolve_highest_overlap(
        source_scale: &str,
        target_scale: &str,
        raw_links: &[RawLink],
    ) -> Result<Crosswalk> {
        let mut best: BTreeMap<String, (String, f64)> = BTreeMap::new();
        for link in raw_links {
            if !link.overlap.is_finite() || link.overlap < 0.0 {
                return Err(Error::Record(format!(
                    "link {} -> {}: overlap {} is not a nonnegative number",
                    link.source_id, link.target_id, link.overlap
                )));
            }
            match best.get_mut(&link.source_id) {
                None => {
                    best.insert(
                        link.source_id.clone(),
                        (link.target_id.clone(), link.overlap),
                    );
                }
                Some((target, weight)) => {
                    let wins = link.overlap > *weight
                        || (link.overlap == *weight && link.target_id < *target);
                    if wins {
                        *target = link.target_id.clone();
                        *weight = link.overlap;
                    }
                }
            }
        }
        for (source, (_, weight)) in &best {
            if *weight == 0.0 {
                return Err(Error::UnresolvableSource(source.clone()));
            }
        }
        Ok(Crosswalk {
            source_scale: source_scale.to_string(),
            target_scale: target_scale.to_string(),
            links: best,
        })
    }

    /// A crosswalk mapping every unit of `frame` to itself, weight 1.
    pub fn identity(frame: &SpatialFrame) -> Crosswalk {
        let links = frame
            .unit_ids()
            .map(|id| (id.to_string(), (id.to_string(), 1.0)))
            .collect();
        Crosswalk {
            source_scale: frame.scale().to_string(),
            target_scale: frame.scale().to_string(),
            links,
        }
    }

    pub fn source_scale(&self) -> &str {
        &self.source_scale
    }

    pub fn target_scale(&self) -> &str {
        &self.target_scale
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn target_of(&self, source_id: &str) -> Option<(&str, f64)> {
        self.links.get(source_id).map(|(t, w)| (t.as_str(), *w))
    }

    /// Resolved links in ascending source-id order.
    pub fn links(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.links.iter().map(|(s, (t, w))| (s.as_str(), t.as_str(), *w))
    }

    /// Target ids referenced by this crosswalk, deduplicated and sorted.
    pub fn target_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.links.values().map(|(t, _)| t.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// How [`reaggregate`] combines source values per target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateMode<'a> {
    /// Weighted mean with weights drawn from the named frame column
    /// (falls back to the population column under the name `population`).
    WeightedMean { weight_attribute: &'a str },
    /// Plain sum of non-missing source values.
    Sum,
}

/// Result of reaggregating one attribute onto the crosswalk's target scale.
#[derive(Debug, Clone)]
pub struct Aggregated {
    /// Per-target value; `None` when a target had zero total weight or no
    /// non-missing sources.
    pub values: BTreeMap<String, Option<f64>>,
    /// Number of (source, target) contributions skipped because the source
    /// value or its weight was missing.
    pub skipped_missing: usize,
}

/// Roll a source-scale attribute up to the crosswalk's target scale.
///
/// Missing source values are skipped, never treated as zero, and the skip
/// count is reported.
pub fn reaggregate(
    frame: &SpatialFrame,
    attribute: &str,
    crosswalk: &Crosswalk,
    mode: AggregateMode,
) -> Result<Aggregated> {
    if crosswalk.source_scale() != frame.scale() {
        return Err(Error::Scale {
            expected: frame.scale().to_string(),
            got: crosswalk.source_scale().to_string(),
        });
    }
    let column = frame.attribute(attribute)?;
    let weights = match mode {
        AggregateMode::WeightedMean { weight_attribute } => {
            let w = frame.weight_column(weight_attribute)?;
            for (unit, value) in frame.units().iter().zip(&w) {
                if let Some(v) = value {
                    if *v < 0.0 {
                        return Err(Error::Domain {
                            unit: unit.id.clone(),
                            reason: format!("negative weight {v}"),
                        });
                    }
                }
            }
            Some(w)
        }
        AggregateMode::Sum => None,
    };

    #[derive(Default)]
    struct Acc {
        weighted_sum: f64,
        weight_total: f64,
        plain_sum: f64,
        count: usize,
    }
    let mut accs: BTreeMap<String, Acc> = BTreeMap::new();
    for target in crosswalk.target_ids() {
        accs.insert(target.to_string(), Acc::default());
    }

    let mut skipped = 0usize;
    for (source, target, _) in crosswalk.links() {
        let row = frame.position(source).ok_or_else(|| Error::UnknownUnit {
            scale: frame.scale().to_string(),
            id: source.to_string(),
        })?;
        let acc = accs.get_mut(target).expect("target preinserted");
        let value = column[row];
        match (&weights, value) {
            (Some(w), Some(x)) => match w[row] {
                Some(weight) => {
                    acc.weighted_sum += weight * x;
                    acc.weight_total += weight;
                    acc.count += 1;
                }
                None => skipped += 1,
            },
            (None, Some(x)) => {
                acc.plain_sum += x;
                acc.count += 1;
            }
            (_, None) => skipped += 1,
        }
    }

    let values = accs
        .into_iter()
        .map(|(target, acc)| {
            let value = if acc.count == 0 {
                None
            } else {
                match mode {
                    AggregateMode::WeightedMean { .. } => {
                        if acc.weight_total > 0.0 {
                            Some(acc.weighted_sum / acc.weight_total)
                        } else {
                            None
                        }
                    }
                    AggregateMode::Sum => Some(acc.plain_sum),
                }
            };
            (target, value)
        })
        .collect();

    Ok(Aggregated {
        values,
        skipped_missing: skipped,
    })
}

/// Copy each target's score down to all of its sources, unchanged.
///
/// Every crosswalk target must have a score; sources not in the crosswalk
/// simply do not appear in the output.
pub fn broadcast_parent<T: Clone>(
    parent_scores: &BTreeMap<String, T>,
    crosswalk: &Crosswalk,
) -> Result<BTreeMap<String, T>> {
    let mut out = BTreeMap::new();
    for (source, target, _) in crosswalk.links() {
        let score = parent_scores
            .get(target)
            .ok_or_else(|| Error::MissingParent(target.to_string()))?;
        out.insert(source.to_string(), score.clone());
    }
    Ok(out)
}
