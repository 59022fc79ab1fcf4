//! Independent oracle implementations for the acceptance suite.
//!
//! Everything here recomputes expected values from first principles,
//! without touching the library's computation paths: ranks come from
//! brute-force pair counting, Kendall counts from exhaustive pair
//! enumeration, composites from per-unit summation over a two-pass
//! z-score. The library must agree with these within each criterion's
//! stated tolerance.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// Two-pass standardization over non-missing values; the all-equal
/// convention (zeros plus a degeneracy flag) mirrors the documented
/// contract.
pub fn oracle_zscore(values: &[Option<f64>], sample: bool) -> (Vec<Option<f64>>, bool) {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    assert!(n >= 2, "oracle_zscore needs 2 non-missing values");
    if present.iter().all(|v| *v == present[0]) {
        return (values.iter().map(|v| v.map(|_| 0.0)).collect(), true);
    }
    let mean = present.iter().sum::<f64>() / n as f64;
    let ss: f64 = present.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = if sample { (n - 1) as f64 } else { n as f64 };
    let sd = (ss / denom).sqrt();
    (
        values.iter().map(|v| v.map(|x| (x - mean) / sd)).collect(),
        false,
    )
}

/// Percentiles by brute-force pair counting: for each value, count the
/// values strictly below it and the values equal to it.
pub fn oracle_percentile(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let n = present.len();
    assert!(n >= 1, "oracle_percentile needs a non-missing value");
    values
        .iter()
        .map(|v| {
            v.map(|x| {
                let less = present.iter().filter(|p| **p < x).count();
                let equal = present.iter().filter(|p| **p == x).count();
                let avg_rank = less as f64 + (equal + 1) as f64 / 2.0;
                100.0 * avg_rank / n as f64
            })
        })
        .collect()
}

/// Explicit threshold checks, `<=` at each boundary.
pub fn oracle_quintile(percentile: f64) -> u8 {
    assert!(percentile > 0.0 && percentile <= 100.0);
    if percentile <= 20.0 {
        1
    } else if percentile <= 40.0 {
        2
    } else if percentile <= 60.0 {
        3
    } else if percentile <= 80.0 {
        4
    } else {
        5
    }
}

/// Per-unit signed summation of oracle z-scores; any missing term input
/// makes the unit's composite missing.
pub fn oracle_additive_raw(
    terms: &[(&str, f64)],
    columns: &BTreeMap<String, Vec<Option<f64>>>,
    n_units: usize,
    sample: bool,
) -> Vec<Option<f64>> {
    let mut standardized: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for (attribute, _) in terms {
        standardized
            .entry(attribute)
            .or_insert_with(|| oracle_zscore(&columns[*attribute], sample).0);
    }
    (0..n_units)
        .map(|u| {
            let mut total = 0.0;
            for (attribute, sign) in terms {
                match standardized[attribute][u] {
                    Some(z) => total += sign * z,
                    None => return None,
                }
            }
            Some(total)
        })
        .collect()
}

/// (raw, percentile, quintile) columns from the oracle chain.
pub type OracleChain = (Vec<Option<f64>>, Vec<Option<f64>>, Vec<Option<u8>>);

/// Full chain: composite, percentile, quintile.
pub fn oracle_rank_chain(
    terms: &[(&str, f64)],
    columns: &BTreeMap<String, Vec<Option<f64>>>,
    n_units: usize,
    sample: bool,
) -> OracleChain {
    let raw = oracle_additive_raw(terms, columns, n_units, sample);
    let percentiles = oracle_percentile(&raw);
    let quintiles = percentiles
        .iter()
        .map(|p| p.map(oracle_quintile))
        .collect();
    (raw, percentiles, quintiles)
}

/// Two-stage hierarchical chain: per-group signed sums are percentile
/// ranked, then averaged with equal group weight.
pub fn oracle_hierarchical_raw(
    grouped_terms: &BTreeMap<String, Vec<(&str, f64)>>,
    columns: &BTreeMap<String, Vec<Option<f64>>>,
    n_units: usize,
    sample: bool,
) -> Vec<Option<f64>> {
    let group_percentiles: Vec<Vec<Option<f64>>> = grouped_terms
        .values()
        .map(|terms| oracle_percentile(&oracle_additive_raw(terms, columns, n_units, sample)))
        .collect();
    let n_groups = group_percentiles.len() as f64;
    (0..n_units)
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
        .collect()
}

/// Average ranks by pair counting (1-based, ties averaged).
pub fn oracle_average_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|x| {
            let less = values.iter().filter(|v| **v < *x).count();
            let equal = values.iter().filter(|v| **v == *x).count();
            less as f64 + (equal + 1) as f64 / 2.0
        })
        .collect()
}

/// Rank-then-Pearson Spearman oracle over paired values.
pub fn oracle_spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let ra = oracle_average_ranks(a);
    let rb = oracle_average_ranks(b);
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
        return None;
    }
    Some((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Exhaustive pair-enumeration counts for Kendall's tau-b.
pub struct KendallCounts {
    pub concordant: u64,
    pub discordant: u64,
    pub tied_a: u64,
    pub tied_b: u64,
    pub total_pairs: u64,
}

pub fn oracle_kendall_counts(a: &[f64], b: &[f64]) -> KendallCounts {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut counts = KendallCounts {
        concordant: 0,
        discordant: 0,
        tied_a: 0,
        tied_b: 0,
        total_pairs: (n as u64) * (n as u64 - 1) / 2,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let tied_a = a[i] == a[j];
            let tied_b = b[i] == b[j];
            if tied_a {
                counts.tied_a += 1;
            }
            if tied_b {
                counts.tied_b += 1;
            }
            if !tied_a && !tied_b {
                let concordant = (a[i] < a[j]) == (b[i] < b[j]);
                if concordant {
                    counts.concordant += 1;
                } else {
                    counts.discordant += 1;
                }
            }
        }
    }
    counts
}

/// Tau-b assembled from enumeration counts; `None` when a side is fully
/// tied.
pub fn oracle_kendall_tau(a: &[f64], b: &[f64]) -> Option<f64> {
    let counts = oracle_kendall_counts(a, b);
    let da = counts.total_pairs - counts.tied_a;
    let db = counts.total_pairs - counts.tied_b;
    if da == 0 || db == 0 {
        return None;
    }
    let numerator = counts.concordant as i64 - counts.discordant as i64;
    Some((numerator as f64 / ((da as f64) * (db as f64)).sqrt()).clamp(-1.0, 1.0))
}

/// Exact categorical alignment percentage.
pub fn oracle_alignment(a: &[u8], b: &[u8]) -> f64 {
    assert_eq!(a.len(), b.len());
    let matches = a.iter().zip(b).filter(|(x, y)| x == y).count();
    100.0 * matches as f64 / a.len() as f64
}
