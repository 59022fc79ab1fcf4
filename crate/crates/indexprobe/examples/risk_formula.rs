//! The multiplicative risk formula: `raw = loss * f(vulnerability /
//! resilience)`, with the transform `f` swapped between identity, a
//! bounded min-max rescale, and the constant 1 (which reduces the score
//! to the loss column alone).
//!
//! ```text
//! cargo run --example risk_formula
//! ```

use indexprobe::frame::{FrameRow, SpatialFrame};
use indexprobe::index::{rank_index, IndexSpec, Method, RiskInputs};

fn risk_spec(name: &str, transform: &str, lo: Option<f64>, hi: Option<f64>) -> IndexSpec {
    IndexSpec {
        name: name.to_string(),
        method: Method::RiskFormula,
        zscore_mode: Default::default(),
        terms: Vec::new(),
        risk_inputs: Some(RiskInputs {
            eal: "expected_loss".to_string(),
            sv: "vulnerability".to_string(),
            cr: "resilience".to_string(),
            transform: transform.to_string(),
            f_lo: lo,
            f_hi: hi,
        }),
    }
}

fn main() -> indexprobe::Result<()> {
    let names = vec![
        "expected_loss".to_string(),
        "vulnerability".to_string(),
        "resilience".to_string(),
    ];
    let data: Vec<(&str, [f64; 3])> = vec![
        ("t01", [110_000.0, 0.62, 0.81]),
        ("t02", [45_000.0, 0.71, 0.64]),
        ("t03", [260_000.0, 0.38, 0.92]),
        ("t04", [88_000.0, 0.55, 0.49]),
        ("t05", [150_000.0, 0.47, 0.73]),
    ];
    let rows = data
        .into_iter()
        .map(|(id, values)| FrameRow {
            id: id.to_string(),
            population: None,
            values: values.iter().map(|v| Some(*v)).collect(),
        })
        .collect();
    let frame = SpatialFrame::build("tract", &names, rows, false)?;

    let specs = [
        risk_spec("risk-identity", "identity", None, None),
        risk_spec("risk-rescaled", "min-max", Some(0.5), Some(1.5)),
        risk_spec("loss-only", "one", None, None),
    ];

    for spec in &specs {
        let ranked = rank_index(spec, &frame)?;
        println!("{}:", spec.name);
        for entry in &ranked.entries {
            println!(
                "  {}  raw={:>12.2}  percentile={:5.1}  quintile={}",
                entry.unit_id,
                entry.raw.unwrap(),
                entry.percentile.unwrap(),
                entry.quintile.unwrap()
            );
        }
    }

    // The two bounded variants rank differently from the raw ratio only
    // when the rescale changes the ordering of loss * f(ratio); the
    // loss-only variant ignores the ratio entirely.
    Ok(())
}
