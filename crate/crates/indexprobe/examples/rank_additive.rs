//! Evaluate an additive z-score index and turn the raw composites into
//! percentile ranks and quintile risk scores.
//!
//! ```text
//! cargo run --example rank_additive
//! ```

use indexprobe::frame::{FrameRow, SpatialFrame};
use indexprobe::index::{rank_index, term, IndexSpec, Sign};

fn main() -> indexprobe::Result<()> {
    // Eight neighborhoods with three heat-relevant attributes. One unit
    // (n05) is missing an input, so its composite stays missing and it
    // drops out of the ranking.
    let names = vec![
        "surface_temp".to_string(),
        "pct_greenspace".to_string(),
        "median_income".to_string(),
    ];
    let data: Vec<(&str, [Option<f64>; 3])> = vec![
        ("n01", [Some(88.5), Some(48.0), Some(96_000.0)]),
        ("n02", [Some(90.2), Some(35.0), Some(81_000.0)]),
        ("n03", [Some(92.8), Some(21.0), Some(54_000.0)]),
        ("n04", [Some(95.9), Some(8.0), Some(35_000.0)]),
        ("n05", [None, Some(27.0), Some(62_000.0)]),
        ("n06", [Some(91.4), Some(31.0), Some(70_000.0)]),
        ("n07", [Some(94.3), Some(14.0), Some(42_000.0)]),
        ("n08", [Some(89.0), Some(55.0), Some(108_000.0)]),
    ];
    let rows = data
        .into_iter()
        .map(|(id, values)| FrameRow {
            id: id.to_string(),
            population: None,
            values: values.to_vec(),
        })
        .collect();
    let frame = SpatialFrame::build("neighborhood", &names, rows, false)?;

    // Hotter is riskier; greener and richer are safer.
    let spec = IndexSpec::additive(
        "heat-exposure",
        vec![
            term("surface_temp", Sign::Plus),
            term("pct_greenspace", Sign::Minus),
            term("median_income", Sign::Minus),
        ],
    );

    let ranked = rank_index(&spec, &frame)?;
    println!(
        "index `{}` at scale `{}` (z-scores: {} convention)",
        ranked.spec_name, ranked.scale, ranked.zscore_mode
    );
    println!("unit     raw        percentile  quintile");
    for entry in &ranked.entries {
        match (entry.raw, entry.percentile, entry.quintile) {
            (Some(raw), Some(percentile), Some(quintile)) => {
                println!("{}  {raw:+9.4}  {percentile:>9.1}  {quintile:>8}", entry.unit_id)
            }
            _ => println!("{}  (missing input, not ranked)", entry.unit_id),
        }
    }

    // Percentiles within half a point of a quintile threshold are worth
    // knowing about: another implementation's tie handling could put
    // them in the neighboring category.
    for (unit, percentile, threshold) in ranked.near_threshold(0.5) {
        println!("near-threshold: {unit} at {percentile} (threshold {threshold})");
    }

    Ok(())
}
