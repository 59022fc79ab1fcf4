//! Build spatial frames from delimited text plus a JSON schema, filter to
//! populated units, resolve a crosswalk by highest overlap, and move
//! values between scales.
//!
//! ```text
//! cargo run --example build_frames
//! ```

use std::collections::BTreeMap;

use indexprobe::frame::{broadcast_parent, reaggregate, AggregateMode, Crosswalk, RawLink};
use indexprobe::io::{load_schema, read_frame};

fn main() -> indexprobe::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");

    // A data file with a missing cell (u2's temperature) and a
    // zero-population unit. Missing stays missing; it never becomes 0.
    let data_path = dir.path().join("tracts.csv");
    std::fs::write(
        &data_path,
        "geoid,pop,avg_temp,pct_green\n\
         t3,1200,91.5,12.0\n\
         t1,960,88.0,44.5\n\
         t2,0,,63.0\n",
    )
    .expect("write data");

    let schema_path = dir.path().join("tracts.schema.json");
    std::fs::write(
        &schema_path,
        r#"{
            "id_column": "geoid",
            "population_column": "pop",
            "attributes": [
                {"column": "avg_temp", "name": "surface_temp", "type": "real"},
                {"column": "pct_green", "type": "real"}
            ]
        }"#,
    )
    .expect("write schema");

    let schema = load_schema(&schema_path)?;
    let frame = read_frame(&data_path, "tract", &schema)?;

    println!("frame at scale `{}` ({} units, sorted by id):", frame.scale(), frame.len());
    for (unit, temp) in frame.units().iter().zip(frame.attribute("surface_temp")?) {
        println!(
            "  {}  pop={:?}  surface_temp={:?}",
            unit.id, unit.population, temp
        );
    }

    let populated = frame.filter_populated()?;
    println!(
        "filter_populated keeps {:?}",
        populated.unit_ids().collect::<Vec<_>>()
    );

    // Raw overlap links: t1 straddles two districts, the bigger overlap
    // wins; equal overlaps would break to the smaller target id.
    let crosswalk = Crosswalk::resolve_highest_overlap(
        "tract",
        "district",
        &[
            RawLink { source_id: "t1".into(), target_id: "D2".into(), overlap: 0.7 },
            RawLink { source_id: "t1".into(), target_id: "D1".into(), overlap: 0.3 },
            RawLink { source_id: "t2".into(), target_id: "D1".into(), overlap: 1.0 },
            RawLink { source_id: "t3".into(), target_id: "D2".into(), overlap: 0.9 },
        ],
    )?;
    println!("resolved crosswalk:");
    for (source, target, weight) in crosswalk.links() {
        println!("  {source} -> {target} (overlap {weight})");
    }

    // Population-weighted mean of greenspace per district. D1's only
    // tract has population 0, so its total weight is 0 and the district
    // gets a missing value rather than a fabricated one.
    let aggregated = reaggregate(
        &frame,
        "pct_green",
        &crosswalk,
        AggregateMode::WeightedMean { weight_attribute: "population" },
    )?;
    println!(
        "district greenspace (population-weighted): {:?} ({} missing contributions skipped)",
        aggregated.values, aggregated.skipped_missing
    );

    // And back down: parents hand each child their value unchanged.
    let parent_scores = BTreeMap::from([("D1".to_string(), 4u8), ("D2".to_string(), 1u8)]);
    let child_scores = broadcast_parent(&parent_scores, &crosswalk)?;
    println!("scores broadcast to tracts: {child_scores:?}");

    Ok(())
}
