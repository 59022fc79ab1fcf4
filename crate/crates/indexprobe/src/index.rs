//! Index specification and evaluation: z-score standardization, additive,
//! hierarchical, and risk-formula composites, tie-aware percentile ranks,
//! and quintile risk scores.
//!
//! Three evaluation methods are supported:
//!
//! * `additive-z` — signed sum of per-attribute z-scores.
//! * `hierarchical` — terms are grouped into sub-indices; each group's
//!   signed z-sum is percentile-ranked within the frame and the groups'
//!   percentiles are averaged with equal weight.
//! * `risk-formula` — `EAL * f(SV / CR)` with a pluggable transform `f`.
//!
//! Raw scores become percentile ranks (`100 * average_rank / n`, ties
//! sharing their average rank) and then quintile scores 1-5 with
//! thresholds at 20/40/60/80, `<=` on the boundary.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frame::SpatialFrame;

/// Denominator convention for the standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZscoreMode {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1.
    Sample,
}

impl fmt::Display for ZscoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZscoreMode::Population => write!(f, "population"),
            ZscoreMode::Sample => write!(f, "sample"),
        }
    }
}

/// Term direction: whether the attribute's z-score is added or subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(deserializer)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!(
                "sign must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// One signed attribute term, optionally assigned to a sub-index group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexTerm {
    pub attribute: String,
    pub sign: Sign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

/// Evaluation method for a spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "additive-z")]
    AdditiveZ,
    #[serde(rename = "hierarchical")]
    Hierarchical,
    #[serde(rename = "risk-formula")]
    RiskFormula,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::AdditiveZ => write!(f, "additive-z"),
            Method::Hierarchical => write!(f, "hierarchical"),
            Method::RiskFormula => write!(f, "risk-formula"),
        }
    }
}

/// Inputs for the risk-formula method, as they appear in spec files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskInputs {
    /// Expected-loss attribute; must be nonnegative per unit.
    pub eal: String,
    /// Vulnerability attribute (numerator of the ratio).
    pub sv: String,
    /// Resilience attribute (denominator; must be positive per unit).
    pub cr: String,
    /// Transform name: `identity`, `min-max`, or `one`.
    pub transform: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_hi: Option<f64>,
}

/// Resolved transform applied to the SV/CR ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskTransform {
    /// f(r) = r
    Identity,
    /// f(r) = 1, reducing the score to the loss attribute alone.
    One,
    /// Min-max rescale of the ratio onto [lo, hi] across scored units.
    MinMax { lo: f64, hi: f64 },
}

impl RiskInputs {
    pub fn transform(&self) -> Result<RiskTransform> {
        match self.transform.as_str() {
            "identity" => Ok(RiskTransform::Identity),
            "one" => Ok(RiskTransform::One),
            "min-max" => {
                let (lo, hi) = match (self.f_lo, self.f_hi) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => {
                        return Err(Error::Spec(
                            "min-max transform requires f_lo and f_hi".to_string(),
                        ))
                    }
                };
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::Spec(format!(
                        "min-max bounds [{lo}, {hi}] are not an ordered finite pair"
                    )));
                }
                Ok(RiskTransform::MinMax { lo, hi })
            }
            other => Err(Error::Spec(format!("unknown transform `{other}`"))),
        }
    }
}

/// A declarative index recipe. Matches the on-disk JSON spec format;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSpec {
    pub name: String,
    pub method: Method,
    #[serde(default)]
    pub zscore_mode: ZscoreMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<IndexTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_inputs: Option<RiskInputs>,
}

impl IndexSpec {
    /// Convenience constructor for additive specs.
    pub fn additive(name: &str, terms: Vec<IndexTerm>) -> IndexSpec {
        IndexSpec {
            name: name.to_string(),
            method: Method::AdditiveZ,
            zscore_mode: ZscoreMode::default(),
            terms,
            risk_inputs: None,
        }
    }

    /// Check the spec's structural invariants.
    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::AdditiveZ | Method::Hierarchical => {
                if self.terms.is_empty() {
                    return Err(Error::Spec(format!(
                        "spec `{}`: method {} requires at least one term",
                        self.name, self.method
                    )));
                }
            }
            Method::RiskFormula => {
                let inputs = self.risk_inputs.as_ref().ok_or_else(|| {
                    Error::Spec(format!(
                        "spec `{}`: risk-formula requires risk_inputs",
                        self.name
                    ))
                })?;
                inputs.transform()?;
            }
        }
        if self.method == Method::Hierarchical {
            for term in &self.terms {
                match &term.group {
                    Some(g) if !g.is_empty() => {}
                    _ => {
                        return Err(Error::Spec(format!(
                            "spec `{}`: hierarchical terms must carry a non-empty group \
                             (term `{}` does not)",
                            self.name, term.attribute
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

/// A signed term like `term("temp", Sign::Plus)`.
pub fn term(attribute: &str, sign: Sign) -> IndexTerm {
    IndexTerm {
        attribute: attribute.to_string(),
        sign,
        group: None,
    }
}

/// A grouped term for hierarchical specs.
pub fn grouped_term(attribute: &str, sign: Sign, group: &str) -> IndexTerm {
    IndexTerm {
        attribute: attribute.to_string(),
        sign,
        group: Some(group.to_string()),
    }
}

/// Output of [`zscore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Zscored {
    pub values: Vec<Option<f64>>,
    /// True when all non-missing inputs were equal; the outputs are all
    /// zero in that case rather than an error, so multi-input specs stay
    /// evaluable, and the flag keeps the degeneracy auditable.
    pub degenerate: bool,
}

/// Standardize a column to mean 0, standard deviation 1 over its
/// non-missing values. Missing stays missing.
pub fn zscore(values: &[Option<f64>], mode: ZscoreMode) -> Result<Zscored> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "zscore needs at least 2 non-missing values, got {n}"
        )));
    }

    // Constancy is detected on the raw values, not on a computed variance:
    // a constant column must standardize to exact zeros even when its mean
    // is not representable.
    let degenerate = present.iter().all(|v| *v == present[0]);
    if degenerate {
        let zeros = values
            .iter()
            .map(|v| v.map(|_| 0.0))
            .collect();
        return Ok(Zscored {
            values: zeros,
            degenerate: true,
        });
    }

    let mean = present.iter().sum::<f64>() / n as f64;
    let ss: f64 = present.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match mode {
        ZscoreMode::Population => n as f64,
        ZscoreMode::Sample => (n - 1) as f64,
    };
    let sd = (ss / denom).sqrt();

    let standardized = values
        .iter()
        .map(|v| v.map(|x| (x - mean) / sd))
        .collect();
    Ok(Zscored {
        values: standardized,
        degenerate: false,
    })
}

/// Tie-aware percentile ranks: `100 * average_rank / n` over the
/// non-missing values, average 1-based ranks across ties. Missing stays
/// missing.
pub fn percentile_rank(values: &[Option<f64>]) -> Result<Vec<Option<f64>>> {
    let mut present: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    let n = present.len();
    if n == 0 {
        return Err(Error::InsufficientData(
            "percentile_rank needs at least 1 non-missing value".to_string(),
        ));
    }
    present.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut out = vec![None; values.len()];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && present[end].1 == present[start].1 {
            end += 1;
        }
        // run occupies 1-based ranks start+1 ..= end
        let avg_rank = (start + end + 1) as f64 / 2.0;
        let percentile = 100.0 * avg_rank / n as f64;
        for &(slot, _) in &present[start..end] {
            out[slot] = Some(percentile);
        }
        start = end;
    }
    Ok(out)
}

/// Map percentiles in (0, 100] onto quintile scores 1-5. Thresholds sit
/// at 20/40/60/80 with `<=` semantics, so a percentile of exactly 20
/// scores 1 and anything above it scores at least 2.
pub fn quintile_score(percentiles: &[Option<f64>]) -> Result<Vec<Option<u8>>> {
    percentiles
        .iter()
        .enumerate()
        .map(|(i, p)| match p {
            None => Ok(None),
            Some(p) => {
                if !(p.is_finite() && *p > 0.0 && *p <= 100.0) {
                    return Err(Error::Domain {
                        unit: format!("slot {i}"),
                        reason: format!("percentile {p} outside (0, 100]"),
                    });
                }
                let q = if *p <= 20.0 {
                    1
                } else if *p <= 40.0 {
                    2
                } else if *p <= 60.0 {
                    3
                } else if *p <= 80.0 {
                    4
                } else {
                    5
                };
                Ok(Some(q))
            }
        })
        .collect()
}

/// Raw composite scores plus the attributes that standardized degenerately.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub raw: Vec<Option<f64>>,
    pub degenerate_inputs: Vec<String>,
}

fn zscore_cache<'a>(
    spec: &'a IndexSpec,
    frame: &SpatialFrame,
) -> Result<(BTreeMap<&'a str, Zscored>, Vec<String>)> {
    let mut cache: BTreeMap<&str, Zscored> = BTreeMap::new();
    let mut degenerate = Vec::new();
    for term in &spec.terms {
        let name = term.attribute.as_str();
        if cache.contains_key(name) {
            continue;
        }
        let column = frame.attribute(name)?;
        let z = zscore(column, spec.zscore_mode).map_err(|e| e.for_spec(&spec.name))?;
        if z.degenerate {
            degenerate.push(name.to_string());
        }
        cache.insert(name, z);
    }
    degenerate.sort();
    degenerate.dedup();
    Ok((cache, degenerate))
}

fn signed_sum(
    terms: &[IndexTerm],
    cache: &BTreeMap<&str, Zscored>,
    n_units: usize,
) -> Vec<Option<f64>> {
    (0..n_units)
        .map(|u| {
            let mut total = 0.0;
            for term in terms {
                match cache[term.attribute.as_str()].values[u] {
                    Some(z) => total += term.sign.factor() * z,
                    None => return None,
                }
            }
            Some(total)
        })
        .collect()
}

/// Evaluate an additive-z spec: the signed sum of term z-scores per unit.
/// Units with any missing term input get a missing composite.
pub fn evaluate_spec(spec: &IndexSpec, frame: &SpatialFrame) -> Result<Evaluated> {
    if spec.method != Method::AdditiveZ {
        return Err(Error::Method {
            spec: spec.name.clone(),
            method: spec.method.to_string(),
        });
    }
    spec.validate()?;
    let (cache, degenerate_inputs) = zscore_cache(spec, frame)?;
    let raw = signed_sum(&spec.terms, &cache, frame.len());
    Ok(Evaluated {
        raw,
        degenerate_inputs,
    })
}

/// Evaluate a hierarchical spec: each group's signed z-sum is percentile
/// ranked within the frame, and those sub-index percentiles are averaged
/// with equal weight per group.
pub fn evaluate_hierarchical(spec: &IndexSpec, frame: &SpatialFrame) -> Result<Evaluated> {
    if spec.method != Method::Hierarchical {
        return Err(Error::Method {
            spec: spec.name.clone(),
            method: spec.method.to_string(),
        });
    }
    spec.validate()?;
    let (cache, degenerate_inputs) = zscore_cache(spec, frame)?;

    let mut groups: BTreeMap<&str, Vec<IndexTerm>> = BTreeMap::new();
    for term in &spec.terms {
        let group = term.group.as_deref().expect("validated: group present");
        groups.entry(group).or_default().push(term.clone());
    }

    let mut group_percentiles: Vec<Vec<Option<f64>>> = Vec::with_capacity(groups.len());
    for terms in groups.values() {
        let subscores = signed_sum(terms, &cache, frame.len());
        let percentiles = percentile_rank(&subscores).map_err(|e| e.for_spec(&spec.name))?;
        group_percentiles.push(percentiles);
    }

    let n_groups = group_percentiles.len() as f64;
    let raw = (0..frame.len())
        .map(|u| {
            let mut total = 0.0;
            for column in &group_percentiles {
                match column[u] {
                    Some(p) => total += p,
                    None => return None,
                }
            }
            Some(total / n_groups)
        })
        .collect();

    Ok(Evaluated {
        raw,
        degenerate_inputs,
    })
}

/// Evaluate a risk-formula spec: `raw = EAL * f(SV / CR)` per unit.
pub fn evaluate_risk_formula(spec: &IndexSpec, frame: &SpatialFrame) -> Result<Evaluated> {
    if spec.method != Method::RiskFormula {
        return Err(Error::Method {
            spec: spec.name.clone(),
            method: spec.method.to_string(),
        });
    }
    spec.validate()?;
    let inputs = spec.risk_inputs.as_ref().expect("validated: inputs present");
    let transform = inputs.transform()?;

    let eal = frame.attribute(&inputs.eal)?;
    let sv = frame.attribute(&inputs.sv)?;
    let cr = frame.attribute(&inputs.cr)?;

    let mut ratios: Vec<Option<f64>> = vec![None; frame.len()];
    for (u, unit) in frame.units().iter().enumerate() {
        let (e, s, c) = match (eal[u], sv[u], cr[u]) {
            (Some(e), Some(s), Some(c)) => (e, s, c),
            _ => continue, // missing input, missing composite
        };
        if c <= 0.0 {
            return Err(Error::Domain {
                unit: unit.id.clone(),
                reason: format!("{} = {} must be positive", inputs.cr, c),
            });
        }
        if e < 0.0 {
            return Err(Error::Domain {
                unit: unit.id.clone(),
                reason: format!("{} = {} must be nonnegative", inputs.eal, e),
            });
        }
        ratios[u] = Some(s / c);
    }

    let mut degenerate_inputs = Vec::new();
    let transformed: Vec<Option<f64>> = match transform {
        RiskTransform::Identity => ratios.clone(),
        RiskTransform::One => ratios.iter().map(|r| r.map(|_| 1.0)).collect(),
        RiskTransform::MinMax { lo, hi } => {
            let present: Vec<f64> = ratios.iter().flatten().copied().collect();
            if present.is_empty() {
                ratios.clone()
            } else {
                let min = present.iter().copied().fold(f64::INFINITY, f64::min);
                let max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if min == max {
                    // flat ratio column: park everything at the midpoint
                    degenerate_inputs.push(format!("{}/{}", inputs.sv, inputs.cr));
                    ratios
                        .iter()
                        .map(|r| r.map(|_| (lo + hi) / 2.0))
                        .collect()
                } else {
                    ratios
                        .iter()
                        .map(|r| r.map(|x| lo + (hi - lo) * (x - min) / (max - min)))
                        .collect()
                }
            }
        }
    };

    let raw = (0..frame.len())
        .map(|u| match (eal[u], transformed[u]) {
            (Some(e), Some(f)) => Some(e * f),
            _ => None,
        })
        .collect();

    Ok(Evaluated {
        raw,
        degenerate_inputs,
    })
}

/// One unit's scores within a [`RankedIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankedUnit {
    pub unit_id: String,
    pub raw: Option<f64>,
    pub percentile: Option<f64>,
    pub quintile: Option<u8>,
}

/// A fully scored index evaluation: raw composites, percentile ranks, and
/// quintile risk scores for every unit of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedIndex {
    pub spec_name: String,
    pub scale: String,
    pub zscore_mode: ZscoreMode,
    /// Aligned to the frame's unit order (ascending id).
    pub entries: Vec<RankedUnit>,
    /// Attributes whose z-scores were degenerate (zero variance).
    pub degenerate_inputs: Vec<String>,
}

impl RankedIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Units that received a score.
    pub fn scored(&self) -> impl Iterator<Item = &RankedUnit> {
        self.entries.iter().filter(|e| e.percentile.is_some())
    }

    pub fn percentile_map(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .filter_map(|e| e.percentile.map(|p| (e.unit_id.clone(), p)))
            .collect()
    }

    pub fn quintile_map(&self) -> BTreeMap<String, u8> {
        self.entries
            .iter()
            .filter_map(|e| e.quintile.map(|q| (e.unit_id.clone(), q)))
            .collect()
    }

    /// Units whose percentile sits within `epsilon` of a quintile
    /// threshold (20/40/60/80); these are the units whose category could
    /// plausibly differ under another implementation's rounding.
    pub fn near_threshold(&self, epsilon: f64) -> Vec<(String, f64, f64)> {
        const THRESHOLDS: [f64; 4] = [20.0, 40.0, 60.0, 80.0];
        let mut flagged = Vec::new();
        if epsilon <= 0.0 {
            return flagged;
        }
        for entry in self.scored() {
            let p = entry.percentile.expect("scored");
            for t in THRESHOLDS {
                if (p - t).abs() < epsilon {
                    flagged.push((entry.unit_id.clone(), p, t));
                }
            }
        }
        flagged
    }
}

/// Evaluate a spec on a frame and rank the result: raw scores, percentile
/// ranks, quintile scores, and degeneracy flags in one pass.
pub fn rank_index(spec: &IndexSpec, frame: &SpatialFrame) -> Result<RankedIndex> {
    let evaluated = match spec.method {
        Method::AdditiveZ => evaluate_spec(spec, frame)?,
        Method::Hierarchical => evaluate_hierarchical(spec, frame)?,
        Method::RiskFormula => evaluate_risk_formula(spec, frame)?,
    };
    let percentiles = percentile_rank(&evaluated.raw).map_err(|e| e.for_spec(&spec.name))?;
    let quintiles = quintile_score(&percentiles)?;

    let entries = frame
        .units()
        .iter()
        .enumerate()
        .map(|(u, unit)| RankedUnit {
            unit_id: unit.id.clone(),
            raw: evaluated.raw[u],
            percentile: percentiles[u],
            quintile: quintiles[u],
        })
        .collect();

    Ok(RankedIndex {
        spec_name: spec.name.clone(),
        scale: frame.scale().to_string(),
        zscore_mode: spec.zscore_mode,
        entries,
        degenerate_inputs: evaluated.degenerate_inputs,
    })
}
