//! File formats: frame CSVs with JSON schemas, crosswalk CSVs, index spec
//! JSON documents, impact record CSVs with configurable column mappings,
//! and the deterministic writers behind every command output.
//!
//! All writers format floats with Rust's shortest round-trip notation and
//! iterate sorted containers, so identical inputs produce byte-identical
//! files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::{Crosswalk, FrameRow, RawLink, SpatialFrame};
use crate::impacts::{
    ComplaintRecord, DispatchRecord, DistributionSystem, Exclusion, OutageInterval, PipelineOutput,
};
use crate::index::{IndexSpec, RankedIndex};
use crate::sensitivity::{StabilitySummary, TransitionRecord, VariantRun};
use crate::validity::{CorrelationEntry, ValidityReport, VariantReport};

/// Declaration of one attribute column in a frame schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeDecl {
    /// Column header in the data file.
    pub column: String,
    /// Attribute name inside the frame; defaults to the column header.
    #[serde(default)]
    pub name: Option<String>,
    /// Only `real` is supported.
    #[serde(rename = "type", default = "default_attribute_type")]
    pub kind: String,
}

fn default_attribute_type() -> String {
    "real".to_string()
}

impl AttributeDecl {
    pub fn attribute_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.column)
    }
}

/// JSON schema for a frame data file: where the unit id lives, where the
/// population count lives (if anywhere), and which columns are attributes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSchema {
    pub id_column: String,
    #[serde(default)]
    pub population_column: Option<String>,
    pub attributes: Vec<AttributeDecl>,
    /// Cell contents treated as missing, besides the empty string.
    #[serde(default)]
    pub missing_values: Vec<String>,
}

impl FrameSchema {
    fn is_missing(&self, cell: &str) -> bool {
        cell.is_empty() || self.missing_values.iter().any(|m| m == cell)
    }

    pub fn validate(&self) -> Result<()> {
        for attribute in &self.attributes {
            if attribute.kind != "real" {
                return Err(Error::Schema(format!(
                    "attribute `{}` has unsupported type `{}` (only `real`)",
                    attribute.attribute_name(),
                    attribute.kind
                )));
            }
        }
        let mut names = BTreeSet::new();
        for attribute in &self.attributes {
            if !names.insert(attribute.attribute_name()) {
                return Err(Error::Schema(format!(
                    "attribute `{}` declared twice",
                    attribute.attribute_name()
                )));
            }
        }
        Ok(())
    }
}

pub fn load_schema(path: &Path) -> Result<FrameSchema> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let schema: FrameSchema =
        serde_json::from_str(&text).map_err(|e| Error::file(path, e))?;
    schema.validate()?;
    Ok(schema)
}

fn header_index(headers: &csv::StringRecord, column: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::file(path, format!("missing column `{column}`")))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::file(path, e))
}

fn parse_cell(schema: &FrameSchema, cell: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if schema.is_missing(cell) {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

/// Read a delimited data file into a frame under `schema`.
pub fn read_frame(path: &Path, scale: &str, schema: &FrameSchema) -> Result<SpatialFrame> {
    schema.validate()?;
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| Error::file(path, e))?.clone();

    let id_idx = header_index(&headers, &schema.id_column, path)?;
    let population_idx = match &schema.population_column {
        Some(column) => Some(header_index(&headers, column, path)?),
        None => None,
    };
    let attribute_idx: Vec<usize> = schema
        .attributes
        .iter()
        .map(|a| header_index(&headers, &a.column, path))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let row = row_number + 1; // 1-based data rows, header excluded
        let id = record.get(id_idx).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::file(path, format!("row {row}: empty unit id")));
        }
        let population = match population_idx {
            Some(idx) => parse_cell(
                schema,
                record.get(idx).unwrap_or(""),
                row,
                schema.population_column.as_deref().unwrap_or("population"),
            )?,
            None => None,
        };
        let values = schema
            .attributes
            .iter()
            .zip(&attribute_idx)
            .map(|(decl, &idx)| parse_cell(schema, record.get(idx).unwrap_or(""), row, &decl.column))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FrameRow {
            id,
            population,
            values,
        });
    }

    let attribute_names: Vec<String> = schema
        .attributes
        .iter()
        .map(|a| a.attribute_name().to_string())
        .collect();
    SpatialFrame::build(scale, &attribute_names, rows, population_idx.is_some())
}

/// Read raw crosswalk links (`source_id,target_id,weight`) and resolve
/// them by highest overlap.
pub fn read_crosswalk(path: &Path, source_scale: &str, target_scale: &str) -> Result<Crosswalk> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| Error::file(path, e))?.clone();
    let source_idx = header_index(&headers, "source_id", path)?;
    let target_idx = header_index(&headers, "target_id", path)?;
    let weight_idx = header_index(&headers, "weight", path)?;

    let mut links = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let weight_cell = record.get(weight_idx).unwrap_or("");
        let overlap = weight_cell.parse::<f64>().map_err(|_| Error::Parse {
            row: row_number + 1,
            column: "weight".to_string(),
            value: weight_cell.to_string(),
        })?;
        links.push(RawLink {
            source_id: record.get(source_idx).unwrap_or("").to_string(),
            target_id: record.get(target_idx).unwrap_or("").to_string(),
            overlap,
        });
    }
    Crosswalk::resolve_highest_overlap(source_scale, target_scale, &links)
}

/// Load and validate an index spec document. Unknown keys are rejected.
pub fn load_index_spec(path: &Path) -> Result<IndexSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let spec: IndexSpec = serde_json::from_str(&text).map_err(|e| Error::file(path, e))?;
    spec.validate()?;
    Ok(spec)
}

/// Hash of a spec's canonical JSON serialization.
pub fn spec_hash(spec: &IndexSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("spec serializes");
    sha256_hex(canonical.as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Read a per-unit outcome table (`unit_id,value`).
pub fn read_outcome_table(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| Error::file(path, e))?.clone();
    let id_idx = header_index(&headers, "unit_id", path)?;
    let value_idx = header_index(&headers, "value", path)?;

    let mut values = BTreeMap::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let id = record.get(id_idx).unwrap_or("").to_string();
        let cell = record.get(value_idx).unwrap_or("");
        let value = cell.parse::<f64>().map_err(|_| Error::Parse {
            row: row_number + 1,
            column: "value".to_string(),
            value: cell.to_string(),
        })?;
        if values.insert(id.clone(), value).is_some() {
            return Err(Error::file(path, format!("duplicate unit id `{id}`")));
        }
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// impact record CSVs

/// Logical-field to column-header mapping with per-pipeline defaults.
#[derive(Debug, Clone, Default)]
pub struct ColumnMap(BTreeMap<String, String>);

impl ColumnMap {
    pub fn new(overrides: BTreeMap<String, String>) -> ColumnMap {
        ColumnMap(overrides)
    }

    fn resolve<'a>(&'a self, field: &'a str) -> &'a str {
        self.0.get(field).map(String::as_str).unwrap_or(field)
    }
}

const DATETIME_FORMATS: [&str; 5] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
    "%m/%d/%Y %I:%M:%S %p",
];

const DATE_FORMATS: [&str; 2] = ["%Y-%m-%d", "%m/%d/%Y"];

pub fn parse_datetime(cell: &str) -> Option<NaiveDateTime> {
    DATETIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(cell, f).ok())
}

pub fn parse_date(cell: &str) -> Option<NaiveDate> {
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(cell, f).ok())
        .or_else(|| parse_datetime(cell).map(|dt| dt.date()))
}

/// Read outage intervals. Fields: `locality_id`, `timestamp`, `system`
/// (network|radial), `customers_out`, `customers_total`.
pub fn read_outage_csv(path: &Path, columns: &ColumnMap) -> Result<Vec<OutageInterval>> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| Error::file(path, e))?.clone();
    let locality_idx = header_index(&headers, columns.resolve("locality_id"), path)?;
    let timestamp_idx = header_index(&headers, columns.resolve("timestamp"), path)?;
    let system_idx = header_index(&headers, columns.resolve("system"), path)?;
    let out_idx = header_index(&headers, columns.resolve("customers_out"), path)?;
    let total_idx = header_index(&headers, columns.resolve("customers_total"), path)?;

    let mut intervals = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let row = row_number + 1;
        let get = |idx: usize| record.get(idx).unwrap_or("");

        let timestamp = parse_datetime(get(timestamp_idx)).ok_or_else(|| Error::Parse {
            row,
            column: "timestamp".to_string(),
            value: get(timestamp_idx).to_string(),
        })?;
        let system = match get(system_idx).to_ascii_lowercase().as_str() {
            "network" => DistributionSystem::Network,
            "radial" => DistributionSystem::Radial,
            other => {
                return Err(Error::Parse {
                    row,
                    column: "system".to_string(),
                    value: other.to_string(),
                })
            }
        };
        let parse_count = |idx: usize, column: &str| -> Result<f64> {
            get(idx).parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: column.to_string(),
                value: get(idx).to_string(),
            })
        };
        intervals.push(OutageInterval::new(
            get(locality_idx),
            timestamp,
            system,
            parse_count(out_idx, "customers_out")?,
            parse_count(total_idx, "customers_total")?,
        )?);
    }
    Ok(intervals)
}

/// Read dispatch records. Fields: `incident_id`, `date`, `zipcode`,
/// `initial_call_type`, `final_call_type`. Empty date/zipcode cells become
/// missing fields, which the pipeline logs and excludes.
pub fn read_dispatch_csv(path: &Path, columns: &ColumnMap) -> Result<Vec<DispatchRecord>> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| Error::file(path, e))?.clone();
    let id_idx = header_index(&headers, columns.resolve("incident_id"), path)?;
    let date_idx = header_index(&headers, columns.resolve("date"), path)?;
    let zip_idx = header_index(&headers, columns.resolve("zipcode"), path)?;
    let initial_idx = header_index(&headers, columns.resolve("initial_call_type"), path)?;
    let final_idx = header_index(&headers, columns.resolve("final_call_type"), path)?;

    let mut records = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let get = |idx: usize| record.get(idx).unwrap_or("");
        let date_cell = get(date_idx);
        let date = if date_cell.is_empty() {
            None
        } else {
            Some(parse_date(date_cell).ok_or_else(|| Error::Parse {
                row: row_number + 1,
                column: "date".to_string(),
                value: date_cell.to_string(),
            })?)
        };
        let zipcode = match get(zip_idx) {
            "" => None,
            z => Some(z.to_string()),
        };
        records.push(DispatchRecord {
            incident_id: get(id_idx).to_string(),
            date,
            zipcode,
            initial_call_type: get(initial_idx).to_string(),
            final_call_type: get(final_idx).to_string(),
        });
    }
    Ok(records)
}

/// Read complaint records. Fields: `complaint_id`, `created_date`,
/// `tract_id`, `descriptor`, `resolution`.
pub fn read_complaint_csv(path: &Path, columns: &ColumnMap) -> Result<Vec<ComplaintRecord>> {
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| Error::file(path, e))?.clone();
    let id_idx = header_index(&headers, columns.resolve("complaint_id"), path)?;
    let date_idx = header_index(&headers, columns.resolve("created_date"), path)?;
    let tract_idx = header_index(&headers, columns.resolve("tract_id"), path)?;
    let descriptor_idx = header_index(&headers, columns.resolve("descriptor"), path)?;
    let resolution_idx = header_index(&headers, columns.resolve("resolution"), path)?;

    let mut records = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::file(path, e))?;
        let get = |idx: usize| record.get(idx).unwrap_or("");
        let date_cell = get(date_idx);
        let created_date = parse_date(date_cell).ok_or_else(|| Error::Parse {
            row: row_number + 1,
            column: "created_date".to_string(),
            value: date_cell.to_string(),
        })?;
        let tract_id = match get(tract_idx) {
            "" => None,
            t => Some(t.to_string()),
        };
        records.push(ComplaintRecord {
            complaint_id: get(id_idx).to_string(),
            created_date,
            tract_id,
            descriptor: get(descriptor_idx).to_string(),
            resolution: get(resolution_idx).to_string(),
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// writers

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::file(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

fn fmt_opt_f64(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn fmt_opt_u8(value: Option<u8>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::file(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

/// Write a preformatted text document (e.g. an SVG), creating parents.
pub fn write_text_file(path: &Path, text: &str) -> Result<()> {
    write_text(path, text)
}

/// Sidecar metadata written next to every ranked-index CSV.
#[derive(Debug, Clone, Serialize)]
pub struct RankMeta {
    pub spec: String,
    pub spec_hash: String,
    pub scale: String,
    pub zscore_mode: String,
    pub n_units: usize,
    pub n_scored: usize,
    pub degenerate_inputs: Vec<String>,
    /// Units whose percentile sits within epsilon of a quintile threshold.
    pub near_threshold: Vec<NearThresholdUnit>,
    pub near_threshold_epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NearThresholdUnit {
    pub unit_id: String,
    pub percentile: f64,
    pub threshold: f64,
}

/// Write `unit_id,raw,percentile,quintile` plus a JSON sidecar of run
/// metadata. Returns the two paths written.
pub fn write_ranked_index(
    dir: &Path,
    stem: &str,
    index: &RankedIndex,
    spec: &IndexSpec,
    near_threshold_epsilon: f64,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta.json"));

    let mut text = String::from("unit_id,raw,percentile,quintile\n");
    for entry in &index.entries {
        text.push_str(&format!(
            "{},{},{},{}\n",
            entry.unit_id,
            fmt_opt_f64(entry.raw),
            fmt_opt_f64(entry.percentile),
            fmt_opt_u8(entry.quintile),
        ));
    }
    write_text(&csv_path, &text)?;

    let near_threshold = index
        .near_threshold(near_threshold_epsilon)
        .into_iter()
        .map(|(unit_id, percentile, threshold)| NearThresholdUnit {
            unit_id,
            percentile,
            threshold,
        })
        .collect();
    let meta = RankMeta {
        spec: index.spec_name.clone(),
        spec_hash: spec_hash(spec),
        scale: index.scale.clone(),
        zscore_mode: index.zscore_mode.to_string(),
        n_units: index.len(),
        n_scored: index.scored().count(),
        degenerate_inputs: index.degenerate_inputs.clone(),
        near_threshold,
        near_threshold_epsilon,
    };
    write_json(&meta_path, &meta)?;
    Ok((csv_path, meta_path))
}

/// Write one run's transition table.
pub fn write_transition_table(
    path: &Path,
    run: &VariantRun,
    transitions: &[TransitionRecord],
) -> Result<()> {
    let by_id: BTreeMap<&str, &TransitionRecord> = transitions
        .iter()
        .map(|t| (t.unit_id.as_str(), t))
        .collect();
    let mut text =
        String::from("unit_id,base_quintile,variant_quintile,direction,base_percentile,variant_percentile\n");
    for pair in &run.pairing {
        let transition = by_id[pair.unit_id.as_str()];
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            pair.unit_id,
            pair.base_quintile,
            pair.variant_quintile,
            transition.direction,
            pair.base_percentile,
            pair.variant_percentile,
        ));
    }
    write_text(path, &text)
}

pub fn write_stability_summary(path: &Path, summary: &StabilitySummary) -> Result<()> {
    write_json(path, summary)
}

/// Write a per-unit outcome table (`unit_id,value`).
pub fn write_outcome_table(path: &Path, values: &BTreeMap<String, f64>) -> Result<()> {
    let mut text = String::from("unit_id,value\n");
    for (id, value) in values {
        text.push_str(&format!("{id},{value}\n"));
    }
    write_text(path, &text)
}

/// Write an exclusion log (`record_id,reason`).
pub fn write_exclusion_log(path: &Path, exclusions: &[Exclusion]) -> Result<()> {
    let mut text = String::from("record_id,reason\n");
    for exclusion in exclusions {
        text.push_str(&format!("{},{}\n", exclusion.record_id, exclusion.reason));
    }
    write_text(path, &text)
}

/// Pipeline audit counts, written alongside each outcome table.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub input_count: usize,
    pub included_count: usize,
    pub excluded_count: usize,
    pub excluded_by_reason: BTreeMap<String, usize>,
    pub skipped_units: usize,
}

pub fn pipeline_summary(output: &PipelineOutput) -> PipelineSummary {
    let mut by_reason: BTreeMap<String, usize> = BTreeMap::new();
    for exclusion in &output.exclusions {
        *by_reason.entry(exclusion.reason.to_string()).or_insert(0) += 1;
    }
    PipelineSummary {
        input_count: output.input_count,
        included_count: output.included_count,
        excluded_count: output.exclusions.len(),
        excluded_by_reason: by_reason,
        skipped_units: output.skipped_units.len(),
    }
}

/// Which correlation a matrix export shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixStat {
    Spearman,
    Kendall,
}

fn stat_of(entry: &CorrelationEntry, stat: MatrixStat) -> Option<f64> {
    match stat {
        MatrixStat::Spearman => entry.spearman,
        MatrixStat::Kendall => entry.kendall,
    }
}

/// Lower-triangular matrix export for a symmetric report: rows are labels
/// 1.., columns labels ..n-1, each unordered pair shown once.
pub fn write_square_matrix_csv(
    path: &Path,
    report: &ValidityReport,
    stat: MatrixStat,
) -> Result<()> {
    let labels = &report.labels;
    let lookup = |a: &str, b: &str| -> Option<f64> {
        report
            .entries
            .iter()
            .find(|e| {
                (e.label_a == a && e.label_b == b) || (e.label_a == b && e.label_b == a)
            })
            .and_then(|e| stat_of(e, stat))
    };

    let mut text = String::new();
    text.push_str("label");
    for column in &labels[..labels.len().saturating_sub(1)] {
        text.push(',');
        text.push_str(column);
    }
    text.push('\n');
    for (i, row) in labels.iter().enumerate().skip(1) {
        text.push_str(row);
        for column in &labels[..i] {
            text.push(',');
            if let Some(value) = lookup(column, row) {
                text.push_str(&value.to_string());
            }
        }
        text.push('\n');
    }
    write_text(path, &text)
}

/// Rectangular matrix export: rows are the report's `label_a` values
/// (impacts), columns its `label_b` values (indices).
pub fn write_rectangular_matrix_csv(
    path: &Path,
    report: &ValidityReport,
    stat: MatrixStat,
) -> Result<()> {
    let mut rows: Vec<&str> = Vec::new();
    let mut columns: Vec<&str> = Vec::new();
    for entry in &report.entries {
        if !rows.contains(&entry.label_a.as_str()) {
            rows.push(&entry.label_a);
        }
        if !columns.contains(&entry.label_b.as_str()) {
            columns.push(&entry.label_b);
        }
    }

    let mut text = String::new();
    text.push_str("label");
    for column in &columns {
        text.push(',');
        text.push_str(column);
    }
    text.push('\n');
    for row in &rows {
        text.push_str(row);
        for column in &columns {
            text.push(',');
            let value = report
                .entries
                .iter()
                .find(|e| e.label_a == *row && e.label_b == *column)
                .and_then(|e| stat_of(e, stat));
            if let Some(value) = value {
                text.push_str(&value.to_string());
            }
        }
        text.push('\n');
    }
    write_text(path, &text)
}

/// Per-variant comparison table: correlations and alignment per variant.
pub fn write_variant_report_csv(path: &Path, report: &VariantReport) -> Result<()> {
    let mut text = String::from(
        "variant,n,spearman_percentile,spearman_quintile,kendall_percentile,kendall_quintile,alignment_percent\n",
    );
    for entry in &report.entries {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            entry.variant,
            entry.n,
            fmt_opt_f64(entry.spearman_percentile),
            fmt_opt_f64(entry.spearman_quintile),
            fmt_opt_f64(entry.kendall_percentile),
            fmt_opt_f64(entry.kendall_quintile),
            fmt_opt_f64(entry.alignment_percent),
        ));
    }
    write_text(path, &text)
}

/// Write a list of (unit_id, reason) pairs, e.g. pairing drop logs.
pub fn write_unit_log(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut text = String::from("unit_id,reason\n");
    for (unit_id, reason) in entries {
        text.push_str(&format!("{unit_id},{reason}\n"));
    }
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(dir: &tempfile::TempDir, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut file = fs::File::create(&path).unwrap();
        file.write_all(contents.as_bytes()).unwrap();
        path
    }

    fn toy_schema() -> FrameSchema {
        serde_json::from_str(
            r#"{
                "id_column": "geoid",
                "population_column": "pop",
                "attributes": [
                    {"column": "temp", "type": "real"},
                    {"column": "income", "name": "median_income"}
                ],
                "missing_values": ["NA"]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn frame_round_trip_with_missing_markers() {
        let dir = tempfile::tempdir().unwrap();
        let data = write_temp(
            &dir,
            "units.csv",
            "geoid,pop,temp,income\nB,100,88.5,NA\nA,50,,42000\n",
        );
        let frame = read_frame(&data, "tract", &toy_schema()).unwrap();
        assert_eq!(frame.unit_ids().collect::<Vec<_>>(), vec!["A", "B"]);
        assert_eq!(frame.attribute("temp").unwrap(), &[None, Some(88.5)]);
        assert_eq!(
            frame.attribute("median_income").unwrap(),
            &[Some(42000.0), None]
        );
    }

    #[test]
    fn frame_rejects_unparseable_cell() {
        let dir = tempfile::tempdir().unwrap();
        let data = write_temp(&dir, "units.csv", "geoid,pop,temp,income\nA,50,hot,1\n");
        let err = read_frame(&data, "tract", &toy_schema()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
    }

    #[test]
    fn schema_rejects_unknown_keys_and_types() {
        assert!(serde_json::from_str::<FrameSchema>(
            r#"{"id_column": "id", "attributes": [], "bogus": 1}"#
        )
        .is_err());
        let bad_type: FrameSchema = serde_json::from_str(
            r#"{"id_column": "id", "attributes": [{"column": "x", "type": "text"}]}"#,
        )
        .unwrap();
        assert!(bad_type.validate().is_err());
    }

    #[test]
    fn crosswalk_read_resolves_links() {
        let dir = tempfile::tempdir().unwrap();
        let data = write_temp(
            &dir,
            "xwalk.csv",
            "source_id,target_id,weight\nA,T1,0.7\nA,T2,0.3\nB,T2,1.0\n",
        );
        let cw = read_crosswalk(&data, "tract", "nta").unwrap();
        assert_eq!(cw.target_of("A"), Some(("T1", 0.7)));
        assert_eq!(cw.target_of("B"), Some(("T2", 1.0)));
    }

    #[test]
    fn outcome_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let values = BTreeMap::from([("A".to_string(), 1.5), ("B".to_string(), 0.0)]);
        let path = dir.path().join("out.csv");
        write_outcome_table(&path, &values).unwrap();
        assert_eq!(read_outcome_table(&path).unwrap(), values);
    }

    #[test]
    fn date_parsing_accepts_portal_formats() {
        assert_eq!(
            parse_date("07/01/2021 02:30:00 PM"),
            Some(NaiveDate::from_ymd_opt(2021, 7, 1).unwrap())
        );
        assert_eq!(
            parse_date("2021-07-01"),
            Some(NaiveDate::from_ymd_opt(2021, 7, 1).unwrap())
        );
        assert_eq!(
            parse_datetime("2021-07-01 14:30"),
            NaiveDate::from_ymd_opt(2021, 7, 1).unwrap().and_hms_opt(14, 30, 0)
        );
        assert_eq!(parse_date("not a date"), None);
    }

    #[test]
    fn spec_hash_is_stable_and_input_sensitive() {
        let a: IndexSpec = serde_json::from_str(
            r#"{"name": "x", "method": "additive-z",
                "terms": [{"attribute": "t", "sign": 1}]}"#,
        )
        .unwrap();
        let b: IndexSpec = serde_json::from_str(
            r#"{"name": "x", "method": "additive-z",
                "terms": [{"attribute": "t", "sign": -1}]}"#,
        )
        .unwrap();
        assert_eq!(spec_hash(&a), spec_hash(&a));
        assert_ne!(spec_hash(&a), spec_hash(&b));
    }
}
