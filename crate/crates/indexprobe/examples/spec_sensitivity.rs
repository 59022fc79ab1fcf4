//! Specification sensitivity: run a base index against alternative term
//! lists, classify per-unit quintile transitions, summarize stability,
//! and emit an SVG scatter of base-versus-variant percentiles.
//!
//! ```text
//! cargo run --example spec_sensitivity
//! ```

use indexprobe::frame::{FrameRow, SpatialFrame};
use indexprobe::index::{term, IndexSpec, Sign};
use indexprobe::plot::{plot_data, scatter_svg};
use indexprobe::sensitivity::{classify_transitions, run_variants, stability_summary, Direction};

fn main() -> indexprobe::Result<()> {
    let names = vec![
        "surface_temp".to_string(),
        "pct_greenspace".to_string(),
        "pct_over_65".to_string(),
        "median_income".to_string(),
    ];
    let data: Vec<(&str, [f64; 4])> = vec![
        ("n01", [88.1, 45.0, 8.0, 95_000.0]),
        ("n02", [90.4, 38.0, 25.0, 78_000.0]),
        ("n03", [92.7, 22.0, 15.0, 52_000.0]),
        ("n04", [95.2, 12.0, 10.0, 38_000.0]),
        ("n05", [93.8, 18.0, 26.0, 61_000.0]),
        ("n06", [94.9, 52.0, 9.0, 102_000.0]),
        ("n07", [96.1, 9.0, 7.0, 33_000.0]),
        ("n08", [91.5, 30.0, 22.0, 69_000.0]),
        ("n09", [89.9, 15.0, 13.0, 45_000.0]),
        ("n10", [87.4, 60.0, 28.0, 115_000.0]),
    ];
    let rows = data
        .into_iter()
        .map(|(id, values)| FrameRow {
            id: id.to_string(),
            population: None,
            values: values.iter().map(|v| Some(*v)).collect(),
        })
        .collect();
    let frame = SpatialFrame::build("neighborhood", &names, rows, false)?;

    let base = IndexSpec::additive(
        "base",
        vec![
            term("surface_temp", Sign::Plus),
            term("pct_greenspace", Sign::Minus),
            term("median_income", Sign::Minus),
        ],
    );
    let variants = vec![
        IndexSpec::additive(
            "environment-only",
            vec![term("surface_temp", Sign::Plus), term("pct_greenspace", Sign::Minus)],
        ),
        IndexSpec::additive(
            "with-seniors",
            vec![
                term("surface_temp", Sign::Plus),
                term("pct_greenspace", Sign::Minus),
                term("median_income", Sign::Minus),
                term("pct_over_65", Sign::Plus),
            ],
        ),
    ];

    let runs = run_variants(&base, &variants, &frame)?;
    for run in &runs {
        println!("{} -> {}:", run.base_label, run.variant_label);
        for record in classify_transitions(run) {
            if record.direction != Direction::NoChange {
                println!(
                    "  {}  {} -> {} ({})",
                    record.unit_id, record.base_quintile, record.variant_quintile, record.direction
                );
            }
        }
    }

    let summary = stability_summary(&runs, 2)?;
    println!(
        "units unchanged under every variant: {}/{} ({:.0}%)",
        summary.unchanged_all_variants,
        summary.n_units,
        100.0 * summary.frac_unchanged_all_variants
    );
    for pairwise in &summary.pairwise {
        println!(
            "  vs {}: {} unchanged, {} up, {} down",
            pairwise.variant, pairwise.unchanged, pairwise.increased, pairwise.decreased
        );
    }
    for jump in &summary.flagged_jumps {
        println!(
            "  flagged jump: {} moved {} -> {} under {}",
            jump.unit_id, jump.base_quintile, jump.variant_quintile, jump.variant
        );
    }

    // The scatter plots base percentile (x) against variant percentile
    // (y) with gridlines at the quintile thresholds.
    let svg_path = std::env::temp_dir().join("spec_sensitivity_scatter.svg");
    std::fs::write(&svg_path, scatter_svg(&plot_data(&runs[0]))).expect("write svg");
    println!("scatter written to {}", svg_path.display());

    Ok(())
}
