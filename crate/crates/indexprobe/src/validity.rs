//! Convergent- and predictive-validity diagnostics: tie-aware Spearman and
//! Kendall rank correlations, categorical score alignment, and correlation
//! matrices across indices and outcome rankings.
//!
//! Rankings at different scales are compared by materializing the coarser
//! ranking at the finer scale through a resolved crosswalk (each fine unit
//! inherits its parent's value), then correlating over the pairwise-complete
//! fine units. Every excluded unit is logged with a reason.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::frame::Crosswalk;
use crate::index::RankedIndex;

/// A labeled per-unit value column at one scale. Values are kept as
/// `Option` so unscored units can be logged when pairing drops them.
#[derive(Debug, Clone)]
pub struct Ranking {
    pub label: String,
    pub scale: String,
    pub values: BTreeMap<String, Option<f64>>,
}

impl Ranking {
    pub fn new(label: &str, scale: &str, values: BTreeMap<String, Option<f64>>) -> Ranking {
        Ranking {
            label: label.to_string(),
            scale: scale.to_string(),
            values,
        }
    }

    /// Percentile column of a ranked index, under `label`.
    pub fn from_percentiles(label: &str, index: &RankedIndex) -> Ranking {
        let values = index
            .entries
            .iter()
            .map(|e| (e.unit_id.clone(), e.percentile))
            .collect();
        Ranking::new(label, &index.scale, values)
    }

    /// Quintile column of a ranked index as real values, under `label`.
    pub fn from_quintiles(label: &str, index: &RankedIndex) -> Ranking {
        let values = index
            .entries
            .iter()
            .map(|e| (e.unit_id.clone(), e.quintile.map(f64::from)))
            .collect();
        Ranking::new(label, &index.scale, values)
    }
}

/// Why a unit was left out of a pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MissingA,
    MissingB,
    Unmapped,
    OutsideUniverse,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::MissingA => write!(f, "missing_a"),
            DropReason::MissingB => write!(f, "missing_b"),
            DropReason::Unmapped => write!(f, "unmapped"),
            DropReason::OutsideUniverse => write!(f, "outside_universe"),
        }
    }
}

/// Two rankings joined onto a common unit set, pairwise complete.
#[derive(Debug, Clone)]
pub struct PairedRanking {
    pub label_a: String,
    pub label_b: String,
    /// Unit ids of the pairing scale, ascending, aligned with `pairs`.
    pub unit_ids: Vec<String>,
    pub pairs: Vec<(f64, f64)>,
    pub dropped: Vec<(String, DropReason)>,
}

impl PairedRanking {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }
}

/// Join two rankings onto a common unit set. Same-scale rankings join on
/// ids; cross-scale rankings need a crosswalk whose source scale matches
/// one side, and the comparison is materialized at that finer scale.
pub fn pair(
    a: &Ranking,
    b: &Ranking,
    crosswalks: &[Crosswalk],
    universe: Option<&BTreeSet<String>>,
) -> Result<PairedRanking> {
    // per fine unit: (value_a, value_b, mapped) candidates
    let mut joined: Vec<(String, Option<f64>, Option<f64>, bool)> = Vec::new();

    if a.scale == b.scale {
        let ids: BTreeSet<&String> = a.values.keys().chain(b.values.keys()).collect();
        for id in ids {
            let va = a.values.get(id).copied().flatten();
            let vb = b.values.get(id).copied().flatten();
            joined.push((id.clone(), va, vb, true));
        }
    } else if let Some(cw) = crosswalks
        .iter()
        .find(|cw| cw.source_scale() == a.scale && cw.target_scale() == b.scale)
    {
        // a is the finer side; b's values broadcast down to a's units
        for (id, va) in &a.values {
            match cw.target_of(id) {
                Some((parent, _)) => {
                    let vb = b.values.get(parent).copied().flatten();
                    joined.push((id.clone(), *va, vb, true));
                }
                None => joined.push((id.clone(), *va, None, false)),
            }
        }
    } else if let Some(cw) = crosswalks
        .iter()
        .find(|cw| cw.source_scale() == b.scale && cw.target_scale() == a.scale)
    {
        for (id, vb) in &b.values {
            match cw.target_of(id) {
                Some((parent, _)) => {
                    let va = a.values.get(parent).copied().flatten();
                    joined.push((id.clone(), va, *vb, true));
                }
                None => joined.push((id.clone(), None, *vb, false)),
            }
        }
    } else {
        return Err(Error::Scale {
            expected: a.scale.clone(),
            got: b.scale.clone(),
        });
    }

    let mut unit_ids = Vec::new();
    let mut pairs = Vec::new();
    let mut dropped = Vec::new();
    for (id, va, vb, mapped) in joined {
        if let Some(u) = universe {
            if !u.contains(&id) {
                dropped.push((id, DropReason::OutsideUniverse));
                continue;
            }
        }
        if !mapped {
            dropped.push((id, DropReason::Unmapped));
            continue;
        }
        match (va, vb) {
            (Some(x), Some(y)) => {
                unit_ids.push(id);
                pairs.push((x, y));
            }
            (None, _) => dropped.push((id, DropReason::MissingA)),
            (_, None) => dropped.push((id, DropReason::MissingB)),
        }
    }

    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "pairing `{}` with `{}` leaves {} pairs",
            a.label,
            b.label,
            pairs.len()
        )));
    }

    Ok(PairedRanking {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        unit_ids,
        pairs,
        dropped,
    })
}

/// 1-based average ranks, ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &slot in &order[start..end] {
            ranks[slot] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: the Pearson correlation of the average-rank transforms
/// of both sides.
pub fn spearman(p: &PairedRanking) -> Result<f64> {
    let a: Vec<f64> = p.pairs.iter().map(|(x, _)| *x).collect();
    let b: Vec<f64> = p.pairs.iter().map(|(_, y)| *y).collect();
    let ra = average_ranks(&a);
    let rb = average_ranks(&b);

    let n = ra.len() as f64;
    let mean_a = ra.iter().sum::<f64>() / n;
    let mean_b = rb.iter().sum::<f64>() / n;
    let mut va = 0.0;
    let mut vb = 0.0;
    let mut cov = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        let da = x - mean_a;
        let db = y - mean_b;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    if va == 0.0 || vb == 0.0 {
        let side = if va == 0.0 { &p.label_a } else { &p.label_b };
        return Err(Error::DegenerateRanking(format!(
            "`{side}` has zero rank variance"
        )));
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Kendall's tau-b, the tie-adjusted variant:
/// `(C - D) / sqrt((P - T_a)(P - T_b))` with `P = n(n-1)/2` and `T_a`,
/// `T_b` the per-side tied-pair counts.
///
/// Computed from exact integer counts via a sort/merge inversion count
/// rather than pair enumeration, so it stays cheap at real sizes.
pub fn kendall_tau(p: &PairedRanking) -> Result<f64> {
    let n = p.n();
    let mut pairs: Vec<(f64, f64)> = p.pairs.clone();
    pairs.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.total_cmp(&r.1)));

    let pair_count = |t: u64| t * (t.saturating_sub(1)) / 2;

    // tied-pair counts on side a, and on both sides jointly
    let mut tied_a = 0u64;
    let mut tied_ab = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        tied_a += pair_count((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut m = k + 1;
            while m < j && pairs[m].1 == pairs[k].1 {
                m += 1;
            }
            tied_ab += pair_count((m - k) as u64);
            k = m;
        }
        i = j;
    }

    // discordant pairs = inversions of the b sequence once sorted by (a, b)
    let mut b_seq: Vec<f64> = pairs.iter().map(|(_, y)| *y).collect();
    let mut buffer = vec![0.0; n];
    let discordant = count_inversions(&mut b_seq, &mut buffer);

    // tied-pair count on side b over the (now sorted) b sequence
    let mut tied_b = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && b_seq[j] == b_seq[i] {
            j += 1;
        }
        tied_b += pair_count((j - i) as u64);
        i = j;
    }

    let total = pair_count(n as u64);
    let da = total - tied_a;
    let db = total - tied_b;
    if da == 0 || db == 0 {
        let side = if da == 0 { &p.label_a } else { &p.label_b };
        return Err(Error::DegenerateRanking(format!(
            "`{side}` is entirely tied"
        )));
    }

    // C - D = P - T_a - T_b + T_ab - 2D
    let concordant_minus_discordant =
        total as i64 - tied_a as i64 - tied_b as i64 + tied_ab as i64 - 2 * discordant as i64;
    let tau = concordant_minus_discordant as f64 / ((da as f64) * (db as f64)).sqrt();
    Ok(tau.clamp(-1.0, 1.0))
}

/// Merge-sort inversion count; `values` ends up sorted ascending.
fn count_inversions(values: &mut [f64], buffer: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inversions = {
        let (left, right) = values.split_at_mut(mid);
        count_inversions(left, &mut buffer[..mid]) + count_inversions(right, &mut buffer[mid..])
    };

    {
        let (left, right) = values.split_at(mid);
        let mut i = 0;
        let mut j = 0;
        let mut k = 0;
        while i < left.len() && j < right.len() {
            if left[i] <= right[j] {
                buffer[k] = left[i];
                i += 1;
            } else {
                buffer[k] = right[j];
                j += 1;
                inversions += (left.len() - i) as u64;
            }
            k += 1;
        }
        while i < left.len() {
            buffer[k] = left[i];
            i += 1;
            k += 1;
        }
        while j < right.len() {
            buffer[k] = right[j];
            j += 1;
            k += 1;
        }
    }
    values.copy_from_slice(&buffer[..n]);
    inversions
}

/// Percent of units receiving the same categorical score under both
/// columns. The unit sets must match exactly.
pub fn alignment(scores_a: &BTreeMap<String, u8>, scores_b: &BTreeMap<String, u8>) -> Result<f64> {
    if scores_a.len() != scores_b.len() || !scores_a.keys().all(|k| scores_b.contains_key(k)) {
        return Err(Error::UnitSet(format!(
            "alignment needs identical unit sets ({} vs {} units)",
            scores_a.len(),
            scores_b.len()
        )));
    }
    if scores_a.is_empty() {
        return Err(Error::InsufficientData(
            "alignment over an empty unit set".to_string(),
        ));
    }
    let matches = scores_a
        .iter()
        .filter(|(id, q)| scores_b[*id] == **q)
        .count();
    Ok(100.0 * matches as f64 / scores_a.len() as f64)
}

/// Which correlations a report computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Spearman,
    Kendall,
    Both,
}

impl CorrelationMethod {
    pub fn wants_spearman(self) -> bool {
        matches!(self, CorrelationMethod::Spearman | CorrelationMethod::Both)
    }
    pub fn wants_kendall(self) -> bool {
        matches!(self, CorrelationMethod::Kendall | CorrelationMethod::Both)
    }
}

/// One cell of a correlation report.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationEntry {
    pub label_a: String,
    pub label_b: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall: Option<f64>,
    pub n: usize,
    pub dropped: usize,
    /// Present when this pair could not be computed; other pairs proceed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A pairwise-correlation report, symmetric by construction (each
/// unordered pair appears once, labels sorted).
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub method: CorrelationMethod,
    pub labels: Vec<String>,
    pub entries: Vec<CorrelationEntry>,
}

fn correlate_pair(
    a: &Ranking,
    b: &Ranking,
    crosswalks: &[Crosswalk],
    method: CorrelationMethod,
    universe: Option<&BTreeSet<String>>,
) -> CorrelationEntry {
    let mut entry = CorrelationEntry {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        spearman: None,
        kendall: None,
        n: 0,
        dropped: 0,
        note: None,
    };
    let paired = match pair(a, b, crosswalks, universe) {
        Ok(p) => p,
        Err(e) => {
            entry.note = Some(e.to_string());
            return entry;
        }
    };
    entry.n = paired.n();
    entry.dropped = paired.dropped.len();
    if method.wants_spearman() {
        match spearman(&paired) {
            Ok(rho) => entry.spearman = Some(rho),
            Err(e) => entry.note = Some(e.to_string()),
        }
    }
    if method.wants_kendall() {
        match kendall_tau(&paired) {
            Ok(tau) => entry.kendall = Some(tau),
            Err(e) => entry.note = Some(e.to_string()),
        }
    }
    entry
}

/// All unordered pairs among `rankings`, correlated. Per-pair failures are
/// recorded in their entries instead of aborting the report.
pub fn correlation_matrix(
    rankings: &[Ranking],
    crosswalks: &[Crosswalk],
    method: CorrelationMethod,
    universe: Option<&BTreeSet<String>>,
) -> Result<ValidityReport> {
    if rankings.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "correlation matrix needs at least 2 rankings, got {}",
            rankings.len()
        )));
    }
    let mut labels: Vec<String> = rankings.iter().map(|r| r.label.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != rankings.len() {
        return Err(Error::Spec("ranking labels must be unique".to_string()));
    }

    let mut sorted: Vec<&Ranking> = rankings.iter().collect();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));

    let mut entries = Vec::new();
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            entries.push(correlate_pair(
                sorted[i], sorted[j], crosswalks, method, universe,
            ));
        }
    }
    Ok(ValidityReport {
        method,
        labels,
        entries,
    })
}

/// Rectangular report of impact-versus-index correlations.
pub fn impact_validity(
    index_rankings: &[Ranking],
    impact_rankings: &[Ranking],
    crosswalks: &[Crosswalk],
    method: CorrelationMethod,
    universe: Option<&BTreeSet<String>>,
) -> Result<ValidityReport> {
    if index_rankings.is_empty() || impact_rankings.is_empty() {
        return Err(Error::InsufficientData(
            "impact validity needs at least one index and one impact ranking".to_string(),
        ));
    }
    let mut labels: Vec<String> = index_rankings
        .iter()
        .chain(impact_rankings)
        .map(|r| r.label.clone())
        .collect();
    labels.sort();

    let mut impacts: Vec<&Ranking> = impact_rankings.iter().collect();
    impacts.sort_by(|a, b| a.label.cmp(&b.label));
    let mut indices: Vec<&Ranking> = index_rankings.iter().collect();
    indices.sort_by(|a, b| a.label.cmp(&b.label));

    let mut entries = Vec::new();
    for impact in &impacts {
        for index in &indices {
            // impact first: rows are impacts in the exported table
            entries.push(correlate_pair(impact, index, crosswalks, method, universe));
        }
    }
    Ok(ValidityReport {
        method,
        labels,
        entries,
    })
}

/// One row of a base-versus-variant comparison report.
#[derive(Debug, Clone, Serialize)]
pub struct VariantEntry {
    pub variant: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman_percentile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman_quintile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall_percentile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall_quintile: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A per-variant comparison against one base index: percentile and
/// quintile rank correlations plus categorical alignment.
#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub base: String,
    pub scale: String,
    pub entries: Vec<VariantEntry>,
}

/// Compare each variant index against the base: rank correlations on the
/// percentile and quintile columns, and alignment of the quintile scores
/// over the units scored by both.
pub fn variant_report(base: &RankedIndex, variants: &[RankedIndex]) -> Result<VariantReport> {
    let mut entries = Vec::new();
    for variant in variants {
        if variant.scale != base.scale {
            return Err(Error::Scale {
                expected: base.scale.clone(),
                got: variant.scale.clone(),
            });
        }
        let mut entry = VariantEntry {
            variant: variant.spec_name.clone(),
            n: 0,
            spearman_percentile: None,
            spearman_quintile: None,
            kendall_percentile: None,
            kendall_quintile: None,
            alignment_percent: None,
            note: None,
        };

        let base_p = Ranking::from_percentiles("base", base);
        let var_p = Ranking::from_percentiles("variant", variant);
        match pair(&base_p, &var_p, &[], None) {
            Ok(paired) => {
                entry.n = paired.n();
                match spearman(&paired) {
                    Ok(rho) => entry.spearman_percentile = Some(rho),
                    Err(e) => entry.note = Some(e.to_string()),
                }
                match kendall_tau(&paired) {
                    Ok(tau) => entry.kendall_percentile = Some(tau),
                    Err(e) => entry.note = Some(e.to_string()),
                }

                let base_q = Ranking::from_quintiles("base", base);
                let var_q = Ranking::from_quintiles("variant", variant);
                if let Ok(paired_q) = pair(&base_q, &var_q, &[], None) {
                    entry.spearman_quintile = spearman(&paired_q).ok();
                    entry.kendall_quintile = kendall_tau(&paired_q).ok();
                }

                // alignment over exactly the units scored by both
                let common: BTreeSet<&String> = paired.unit_ids.iter().collect();
                let qa: BTreeMap<String, u8> = base
                    .quintile_map()
                    .into_iter()
                    .filter(|(id, _)| common.contains(id))
                    .collect();
                let qb: BTreeMap<String, u8> = variant
                    .quintile_map()
                    .into_iter()
                    .filter(|(id, _)| common.contains(id))
                    .collect();
                match alignment(&qa, &qb) {
                    Ok(pct) => entry.alignment_percent = Some(pct),
                    Err(e) => entry.note = Some(e.to_string()),
                }
            }
            Err(e) => entry.note = Some(e.to_string()),
        }
        entries.push(entry);
    }
    Ok(VariantReport {
        base: base.spec_name.clone(),
        scale: base.scale.clone(),
        entries,
    })
}
