//! Spatial-scale sensitivity: score an index at a coarse scale, broadcast
//! those scores down to finer units, re-derive the index among the fine
//! units, and see which of them would change category.
//!
//! One attribute (air conditioning access) is only measured at the coarse
//! scale, so it is copied from each unit's parent before evaluation.
//!
//! ```text
//! cargo run --example scale_sensitivity
//! ```

use indexprobe::frame::{Crosswalk, FrameRow, RawLink, SpatialFrame};
use indexprobe::index::{rank_index, term, IndexSpec, Sign};
use indexprobe::sensitivity::{classify_transitions, scale_sensitivity, Direction};

fn frame(scale: &str, names: &[&str], data: &[(&str, &[f64])]) -> indexprobe::Result<SpatialFrame> {
    let names: Vec<String> = names.iter().map(|n| n.to_string()).collect();
    let rows = data
        .iter()
        .map(|(id, values)| FrameRow {
            id: id.to_string(),
            population: None,
            values: values.iter().map(|v| Some(*v)).collect(),
        })
        .collect();
    SpatialFrame::build(scale, &names, rows, false)
}

fn main() -> indexprobe::Result<()> {
    // Five districts, each split into two tracts. District attributes are
    // averages that hide within-district contrast.
    let coarse = frame(
        "district",
        &["surface_temp", "pct_hh_ac"],
        &[
            ("D1", &[88.0, 92.0]),
            ("D2", &[91.0, 88.0]),
            ("D3", &[93.0, 84.0]),
            ("D4", &[95.0, 80.0]),
            ("D5", &[97.0, 76.0]),
        ],
    )?;
    let fine = frame(
        "tract",
        &["surface_temp"],
        &[
            ("D1a", &[86.0]),
            ("D1b", &[90.0]),
            ("D2a", &[88.0]),
            ("D2b", &[96.0]),
            ("D3a", &[91.5]),
            ("D3b", &[94.5]),
            ("D4a", &[99.5]),
            ("D4b", &[90.5]),
            ("D5a", &[96.5]),
            ("D5b", &[97.5]),
        ],
    )?;
    let links: Vec<RawLink> = fine
        .unit_ids()
        .map(|id| RawLink {
            source_id: id.to_string(),
            target_id: id[..2].to_string(),
            overlap: 1.0,
        })
        .collect();
    let crosswalk = Crosswalk::resolve_highest_overlap("tract", "district", &links)?;

    let spec = IndexSpec::additive(
        "heat-ac",
        vec![term("surface_temp", Sign::Plus), term("pct_hh_ac", Sign::Minus)],
    );

    // pct_hh_ac only exists at the district scale; broadcast it down.
    let coarse_index = rank_index(&spec, &coarse)?;
    let run = scale_sensitivity(
        &spec,
        &fine,
        &crosswalk,
        &coarse_index,
        Some(&coarse),
        &["pct_hh_ac".to_string()],
    )?;

    println!("tract    inherited  re-derived  direction");
    for record in classify_transitions(&run) {
        let marker = match record.direction {
            Direction::NoChange => " ",
            Direction::Increase => "+",
            Direction::Decrease => "-",
        };
        println!(
            "{:6}  {:>9}  {:>10}  {marker}",
            record.unit_id, record.base_quintile, record.variant_quintile
        );
    }

    let moved = run
        .pairing
        .iter()
        .filter(|p| p.base_quintile != p.variant_quintile)
        .count();
    println!(
        "{moved}/{} tracts change quintile when the index is rebuilt at the finer scale",
        run.pairing.len()
    );

    Ok(())
}
