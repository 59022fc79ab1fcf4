//! The whole batch workflow driven through a run config, the same way the
//! `indexprobe` binary drives it: write a config + data to disk, then
//! rank, run the sensitivity analysis, and build validity reports.
//!
//! ```text
//! cargo run --example cli_workflow
//! ```

use indexprobe::commands::{cmd_rank, cmd_sensitivity, cmd_validity, CommandContext};
use indexprobe::config::Overrides;

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let root = dir.path();

    std::fs::write(
        root.join("units.csv"),
        "unit_id,population,surface_temp,pct_greenspace,median_income,pct_over_65\n\
         n01,3200,88.1,45.0,95000,8.0\n\
         n02,4100,90.4,38.0,78000,25.0\n\
         n03,5250,92.7,22.0,52000,15.0\n\
         n04,6100,95.2,12.0,38000,10.0\n\
         n05,2890,93.8,18.0,61000,26.0\n\
         n06,3750,94.9,52.0,102000,9.0\n\
         n07,5890,96.1,9.0,33000,7.0\n\
         n08,4480,91.5,30.0,69000,22.0\n\
         n09,5020,89.9,15.0,45000,13.0\n\
         n10,2600,87.4,60.0,115000,28.0\n",
    )
    .unwrap();
    std::fs::write(
        root.join("units.schema.json"),
        r#"{
            "id_column": "unit_id",
            "population_column": "population",
            "attributes": [
                {"column": "surface_temp", "type": "real"},
                {"column": "pct_greenspace", "type": "real"},
                {"column": "median_income", "type": "real"},
                {"column": "pct_over_65", "type": "real"}
            ]
        }"#,
    )
    .unwrap();
    std::fs::write(
        root.join("base.json"),
        r#"{
            "name": "base",
            "method": "additive-z",
            "terms": [
                {"attribute": "surface_temp", "sign": 1},
                {"attribute": "pct_greenspace", "sign": -1},
                {"attribute": "median_income", "sign": -1}
            ]
        }"#,
    )
    .unwrap();
    std::fs::write(
        root.join("with_seniors.json"),
        r#"{
            "name": "with-seniors",
            "method": "additive-z",
            "terms": [
                {"attribute": "surface_temp", "sign": 1},
                {"attribute": "pct_greenspace", "sign": -1},
                {"attribute": "median_income", "sign": -1},
                {"attribute": "pct_over_65", "sign": 1}
            ]
        }"#,
    )
    .unwrap();
    std::fs::write(
        root.join("run.json"),
        r#"{
            "frames": [
                {"scale": "neighborhood", "data": "units.csv", "schema": "units.schema.json"}
            ],
            "specs": ["base.json"],
            "variants": ["with_seniors.json"],
            "outputs": "out",
            "options": {"quintile_epsilon": 0.5}
        }"#,
    )
    .unwrap();

    // Equivalent CLI invocations:
    //   indexprobe rank        --config run.json
    //   indexprobe sensitivity --config run.json
    //   indexprobe validity    --config run.json
    let ctx = CommandContext::load(&root.join("run.json"), &Overrides::default(), false)
        .expect("config loads");

    let written = cmd_rank(&ctx).expect("rank succeeds");
    println!("rank wrote {} files:", written.len());
    for file in &written {
        println!("  {}", file);
    }

    let written = cmd_sensitivity(&ctx).expect("sensitivity succeeds");
    println!("sensitivity wrote {} files", written.len());

    let written = cmd_validity(&ctx).expect("validity succeeds");
    println!("validity wrote {} files", written.len());

    let summary =
        std::fs::read_to_string(ctx.out_dir.join("summary.json")).expect("summary exists");
    println!("stability summary:\n{summary}");
}
