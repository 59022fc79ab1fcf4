//! Binary-level tests: exit codes, manifests, output determinism, and the
//! environment-variable override for the output directory.

use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(path)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_indexprobe"))
}

#[test]
fn rank_writes_one_output_pair_per_spec_and_frame() {
    let out = tempfile::tempdir().unwrap();
    let config_dir = tempfile::tempdir().unwrap();
    let config_path = config_dir.path().join("rank.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{
                "frames": [{{"scale": "district", "data": "{data}", "schema": "{schema}"}}],
                "specs": ["{base}", "{alt}"],
                "outputs": "unused"
            }}"#,
            data = fixture("data/units.csv").display(),
            schema = fixture("schemas/units.json").display(),
            base = fixture("specs/original.json").display(),
            alt = fixture("specs/alt1-environment.json").display(),
        ),
    )
    .unwrap();

    let status = bin()
        .args(["rank", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());

    for name in [
        "rank__original__district.csv",
        "rank__original__district.meta.json",
        "rank__alt1-environment__district.csv",
        "rank__alt1-environment__district.meta.json",
        "manifest.json",
    ] {
        assert!(out.path().join(name).exists(), "missing {name}");
    }

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("rank__original__district.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["scale"], "district");
    assert_eq!(meta["n_units"], 10);
    assert_eq!(meta["n_scored"], 10);
    assert_eq!(meta["spec_hash"].as_str().unwrap().len(), 64);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "rank");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest.get("timestamp").is_none(), "no timestamp without --stamp");
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(outputs.contains(&"rank__original__district.csv"));
    assert!(outputs.contains(&"manifest.json"));
}

#[test]
fn rank_outputs_are_deterministic() {
    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["sensitivity", "--config"])
            .arg(fixture("configs/sensitivity.json"))
            .arg("--out")
            .arg(out.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut names: Vec<String> = std::fs::read_dir(out_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for name in names {
        let a = std::fs::read(out_a.path().join(&name)).unwrap();
        let b = std::fs::read(out_b.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn stamp_flag_adds_timestamp() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["rank", "--stamp", "--config"])
        .arg(fixture("configs/sensitivity.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("manifest.json")).unwrap())
            .unwrap();
    assert!(manifest["timestamp"].is_string());
}

#[test]
fn bad_spec_path_exits_2_and_names_the_path() {
    let config_dir = tempfile::tempdir().unwrap();
    let config_path = config_dir.path().join("bad.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{
                "frames": [{{"scale": "district", "data": "{data}", "schema": "{schema}"}}],
                "specs": ["no/such/spec.json"],
                "outputs": "out"
            }}"#,
            data = fixture("data/units.csv").display(),
            schema = fixture("schemas/units.json").display(),
        ),
    )
    .unwrap();

    let output = bin()
        .args(["rank", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("spec.json"),
        "stderr should name the missing path: {stderr}"
    );
}

#[test]
fn missing_config_exits_2() {
    let output = bin()
        .args(["rank", "--config", "no/such/config.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_pipeline_exits_2() {
    let config_dir = tempfile::tempdir().unwrap();
    let config_path = config_dir.path().join("bad.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{
                "impacts": [{{"pipeline": "tornado", "name": "t", "input": "{input}"}}],
                "outputs": "out"
            }}"#,
            input = fixture("data/ems.csv").display(),
        ),
    )
    .unwrap();
    let output = bin()
        .args(["ingest", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("tornado"));
}

#[test]
fn env_var_overrides_config_output_dir() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["ingest", "--config"])
        .arg(fixture("configs/ingest.json"))
        .env("INDEXPROBE_OUT", out.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.path().join("ems_heat.csv").exists());
}

#[test]
fn cli_out_flag_beats_env_var() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["ingest", "--config"])
        .arg(fixture("configs/ingest.json"))
        .arg("--out")
        .arg(flag_dir.path())
        .env("INDEXPROBE_OUT", env_dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(flag_dir.path().join("ems_heat.csv").exists());
    assert!(!env_dir.path().join("ems_heat.csv").exists());
}

#[test]
fn months_override_changes_ingest_results() {
    let out = tempfile::tempdir().unwrap();
    // February excluded by default; widening the months admits record E6
    let status = bin()
        .args(["ingest", "--months", "1-12", "--config"])
        .arg(fixture("configs/ingest.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let table = std::fs::read_to_string(out.path().join("ems_heat.csv")).unwrap();
    assert!(table.contains("10002,2"), "wider months admit the March record: {table}");
}

#[test]
fn validity_reports_cover_matrix_and_alignment() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["validity", "--config"])
        .arg(fixture("configs/validity.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    // single spec => no pairwise matrix, but the variant report exists
    assert!(out.path().join("variant_report.csv").exists());
    assert!(out.path().join("variant_report.json").exists());

    let report = std::fs::read_to_string(out.path().join("variant_report.csv")).unwrap();
    assert!(report.lines().count() == 5, "4 variants + header: {report}");
}

#[test]
fn self_variant_and_identity_crosswalk_are_no_ops() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sensitivity", "--config"])
        .arg(fixture("configs/sensitivity_scale.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());

    // the only variant is the base spec itself
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["frac_unchanged_all_variants"], 1.0);
    assert_eq!(summary["unchanged_all_variants"], 10);

    // re-deriving at a scale linked by an identity crosswalk moves nothing
    let transitions =
        std::fs::read_to_string(out.path().join("scale__transitions.csv")).unwrap();
    let mut rows = 0;
    for line in transitions.lines().skip(1) {
        assert!(line.contains(",no-change,"), "unexpected transition: {line}");
        rows += 1;
    }
    assert_eq!(rows, 10);
}

#[test]
fn validity_with_two_specs_emits_matrix_and_alignment() {
    let config_dir = tempfile::tempdir().unwrap();
    let config_path = config_dir.path().join("validity2.json");
    std::fs::write(
        &config_path,
        format!(
            r#"{{
                "frames": [{{"scale": "district", "data": "{data}", "schema": "{schema}"}}],
                "specs": ["{base}", "{alt}"],
                "outputs": "out"
            }}"#,
            data = fixture("data/units.csv").display(),
            schema = fixture("schemas/units.json").display(),
            base = fixture("specs/original.json").display(),
            alt = fixture("specs/alt1-environment.json").display(),
        ),
    )
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["validity", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());

    let matrix = std::fs::read_to_string(out.path().join("matrix_spearman.csv")).unwrap();
    assert!(matrix.starts_with("label,"), "{matrix}");
    assert!(matrix.contains("original@district"));
    assert!(out.path().join("matrix_kendall.csv").exists());
    assert!(out.path().join("correlations.json").exists());

    let alignment = std::fs::read_to_string(out.path().join("alignment.csv")).unwrap();
    let row = alignment.lines().nth(1).unwrap();
    assert!(
        row.starts_with("alt1-environment@district,original@district,"),
        "{alignment}"
    );
    assert!(row.ends_with(",10"), "all ten units compared: {alignment}");
}
