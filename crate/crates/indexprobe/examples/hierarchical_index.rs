//! A hierarchical index: terms grouped into sub-indices, each sub-index
//! percentile-ranked within the frame, and the groups averaged with equal
//! weight.
//!
//! ```text
//! cargo run --example hierarchical_index
//! ```

use indexprobe::frame::{FrameRow, SpatialFrame};
use indexprobe::index::{evaluate_hierarchical, grouped_term, rank_index, IndexSpec, Method, Sign};

fn main() -> indexprobe::Result<()> {
    let names = vec![
        "heat_days".to_string(),
        "surface_temp".to_string(),
        "pct_over_65".to_string(),
        "pct_poverty".to_string(),
        "pct_asthma".to_string(),
    ];
    let data: Vec<(&str, [f64; 5])> = vec![
        ("z01", [12.0, 88.0, 9.0, 6.5, 8.2]),
        ("z02", [15.0, 90.5, 14.0, 11.0, 9.9]),
        ("z03", [22.0, 94.0, 11.0, 24.0, 13.4]),
        ("z04", [18.0, 92.2, 21.0, 15.5, 10.8]),
        ("z05", [25.0, 95.7, 17.0, 28.0, 14.6]),
        ("z06", [10.0, 87.1, 26.0, 8.0, 7.5]),
    ];
    let rows = data
        .into_iter()
        .map(|(id, values)| FrameRow {
            id: id.to_string(),
            population: None,
            values: values.iter().map(|v| Some(*v)).collect(),
        })
        .collect();
    let frame = SpatialFrame::build("zcta", &names, rows, false)?;

    // Three evenly weighted sub-indices: exposure, demographics, health.
    let spec = IndexSpec {
        name: "layered-heat-health".to_string(),
        method: Method::Hierarchical,
        zscore_mode: Default::default(),
        terms: vec![
            grouped_term("heat_days", Sign::Plus, "exposure"),
            grouped_term("surface_temp", Sign::Plus, "exposure"),
            grouped_term("pct_over_65", Sign::Plus, "demographics"),
            grouped_term("pct_poverty", Sign::Plus, "demographics"),
            grouped_term("pct_asthma", Sign::Plus, "health"),
        ],
        risk_inputs: None,
    };

    // The raw composite of a hierarchical spec is the mean of its
    // sub-index percentiles, so it already lives on a 0-100 scale.
    let evaluated = evaluate_hierarchical(&spec, &frame)?;
    println!("mean of sub-index percentiles per unit:");
    for (unit, raw) in frame.units().iter().zip(&evaluated.raw) {
        println!("  {}  {:?}", unit.id, raw);
    }

    let ranked = rank_index(&spec, &frame)?;
    println!("final ranking:");
    for entry in &ranked.entries {
        println!(
            "  {}  raw={:6.2}  percentile={:6.2}  quintile={}",
            entry.unit_id,
            entry.raw.unwrap(),
            entry.percentile.unwrap(),
            entry.quintile.unwrap()
        );
    }

    Ok(())
}
