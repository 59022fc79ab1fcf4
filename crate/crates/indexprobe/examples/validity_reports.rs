//! Validity diagnostics: rank correlations (Spearman, tie-adjusted
//! Kendall tau-b) between indices at different scales, categorical
//! alignment, and a rectangular index-versus-outcome report.
//!
//! ```text
//! cargo run --example validity_reports
//! ```

use std::collections::BTreeMap;

use indexprobe::frame::{Crosswalk, RawLink};
use indexprobe::validity::{
    alignment, correlation_matrix, impact_validity, pair, CorrelationMethod, Ranking,
};

fn ranking(label: &str, scale: &str, values: &[(&str, f64)]) -> Ranking {
    Ranking::new(
        label,
        scale,
        values
            .iter()
            .map(|(id, v)| (id.to_string(), Some(*v)))
            .collect(),
    )
}

fn main() -> indexprobe::Result<()> {
    // Two tract-level rankings and one coarser district-level ranking.
    let heat_index = ranking(
        "heat-index",
        "tract",
        &[
            ("t1", 12.5), ("t2", 25.0), ("t3", 37.5), ("t4", 50.0),
            ("t5", 62.5), ("t6", 75.0), ("t7", 87.5), ("t8", 100.0),
        ],
    );
    let hazard_index = ranking(
        "hazard-index",
        "tract",
        &[
            ("t1", 25.0), ("t2", 12.5), ("t3", 50.0), ("t4", 37.5),
            ("t5", 75.0), ("t6", 87.5), ("t7", 62.5), ("t8", 100.0),
        ],
    );
    let district_index = ranking(
        "district-index",
        "district",
        &[("D1", 25.0), ("D2", 50.0), ("D3", 75.0), ("D4", 100.0)],
    );
    let crosswalk = Crosswalk::resolve_highest_overlap(
        "tract",
        "district",
        &(1..=8)
            .map(|i| RawLink {
                source_id: format!("t{i}"),
                target_id: format!("D{}", (i + 1) / 2),
                overlap: 1.0,
            })
            .collect::<Vec<_>>(),
    )?;

    // Pairwise matrix: the cross-scale pair materializes at the tract
    // scale, each tract inheriting its district's value.
    let report = correlation_matrix(
        &[heat_index.clone(), hazard_index.clone(), district_index],
        &[crosswalk],
        CorrelationMethod::Both,
        None,
    )?;
    println!("pairwise rank correlations:");
    for entry in &report.entries {
        println!(
            "  {} vs {}: spearman={:+.3} kendall={:+.3} (n={})",
            entry.label_a,
            entry.label_b,
            entry.spearman.unwrap(),
            entry.kendall.unwrap(),
            entry.n
        );
    }

    // Alignment compares 5-category scores, not percentiles: two indices
    // can correlate strongly yet disagree on many categories.
    let quintiles_a: BTreeMap<String, u8> = heat_index
        .values
        .iter()
        .map(|(id, v)| (id.clone(), indexprobe::quintile_score(&[*v]).unwrap()[0].unwrap()))
        .collect();
    let quintiles_b: BTreeMap<String, u8> = hazard_index
        .values
        .iter()
        .map(|(id, v)| (id.clone(), indexprobe::quintile_score(&[*v]).unwrap()[0].unwrap()))
        .collect();
    let paired = pair(&heat_index, &hazard_index, &[], None)?;
    println!(
        "heat vs hazard: spearman {:+.3}, alignment {:.1}%",
        indexprobe::spearman(&paired)?,
        alignment(&quintiles_a, &quintiles_b)?
    );

    // Outcome validity: how well does each index rank a measured outcome?
    let outage_ranking = ranking(
        "outage-rate",
        "tract",
        &[
            ("t1", 50.0), ("t2", 12.5), ("t3", 25.0), ("t4", 87.5),
            ("t5", 37.5), ("t6", 100.0), ("t7", 62.5), ("t8", 75.0),
        ],
    );
    let impact_report = impact_validity(
        &[heat_index, hazard_index],
        &[outage_ranking],
        &[],
        CorrelationMethod::Spearman,
        None,
    )?;
    println!("index vs outcome:");
    for entry in &impact_report.entries {
        println!(
            "  {} vs {}: spearman={:+.3}",
            entry.label_a,
            entry.label_b,
            entry.spearman.unwrap()
        );
    }

    Ok(())
}
