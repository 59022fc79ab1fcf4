//! Command implementations behind the CLI: rank, sensitivity, validity,
//! and ingest. Each loads a [`RunConfig`], runs the requested analysis,
//! writes deterministic outputs, and finishes with a machine-readable
//! manifest of inputs, config hash, and outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{
    resolve_options, EffectiveOptions, ImpactEntry, Overrides, RankingRole, RunConfig, SpecEntry,
};
use crate::error::Error;
use crate::frame::{Crosswalk, SpatialFrame};
use crate::impacts::{self, PipelineOutput};
use crate::index::{percentile_rank, quintile_score, rank_index, IndexSpec};
use crate::io;
use crate::plot;
use crate::sensitivity::{
    classify_transitions, scale_sensitivity, stability_summary, VariantRun,
};
use crate::validity::{
    alignment, correlation_matrix, impact_validity, variant_report, CorrelationMethod, Ranking,
};

/// Command failures split by exit code: configuration problems (bad
/// paths, malformed files, undeclared scales) exit 2, computation
/// failures on valid inputs exit 1.
#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Computation(Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Computation(_) => 1,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(message) => write!(f, "configuration error: {message}"),
            CmdError::Computation(error) => write!(f, "computation error: {error}"),
        }
    }
}

type CmdResult<T> = std::result::Result<T, CmdError>;

fn config_err<T>(result: Result<T, Error>) -> CmdResult<T> {
    result.map_err(|e| CmdError::Config(e.to_string()))
}

fn compute_err<T>(result: Result<T, Error>) -> CmdResult<T> {
    result.map_err(CmdError::Computation)
}

/// A loaded config plus everything shared by the commands.
pub struct CommandContext {
    pub config: RunConfig,
    pub options: EffectiveOptions,
    pub out_dir: PathBuf,
    config_path: String,
    config_sha256: String,
    stamp: bool,
}

impl CommandContext {
    /// Load and resolve a config file, apply CLI overrides, and settle the
    /// output directory (`--out` beats `INDEXPROBE_OUT` beats the config).
    pub fn load(config_path: &Path, overrides: &Overrides, stamp: bool) -> CmdResult<Self> {
        let text = fs::read_to_string(config_path)
            .map_err(|e| CmdError::Config(format!("{}: {e}", config_path.display())))?;
        let mut config = RunConfig::parse(&text)
            .map_err(|e| CmdError::Config(format!("{}: {e}", config_path.display())))?;
        let base = config_path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);

        let options = config_err(resolve_options(&config.options, overrides))?;

        let out_dir = overrides
            .out
            .clone()
            .or_else(|| std::env::var_os("INDEXPROBE_OUT").map(PathBuf::from))
            .unwrap_or_else(|| config.outputs.clone());

        Ok(CommandContext {
            config,
            options,
            out_dir,
            config_path: config_path.display().to_string(),
            config_sha256: io::sha256_hex(text.as_bytes()),
            stamp,
        })
    }

    fn load_frames(&self) -> CmdResult<Vec<(String, SpatialFrame)>> {
        let mut frames = Vec::new();
        let mut seen = BTreeSet::new();
        for entry in &self.config.frames {
            if !seen.insert(entry.scale.clone()) {
                return Err(CmdError::Config(format!(
                    "scale `{}` declared twice",
                    entry.scale
                )));
            }
            let schema = config_err(io::load_schema(&entry.schema))?;
            let mut frame = config_err(io::read_frame(&entry.data, &entry.scale, &schema))?;
            if entry.filter_populated {
                frame = config_err(frame.filter_populated())?;
            }
            frames.push((entry.scale.clone(), frame));
        }
        Ok(frames)
    }

    fn load_crosswalks(&self) -> CmdResult<Vec<Crosswalk>> {
        self.config
            .crosswalks
            .iter()
            .map(|entry| {
                config_err(io::read_crosswalk(
                    &entry.path,
                    &entry.source_scale,
                    &entry.target_scale,
                ))
            })
            .collect()
    }

    /// Load specs; the configured z-score mode override applies to all.
    fn load_specs(&self, entries: &[SpecEntry]) -> CmdResult<Vec<(IndexSpec, SpecEntry)>> {
        let mut specs = Vec::new();
        for entry in entries {
            let mut spec = config_err(io::load_index_spec(entry.path()))?;
            if let Some(mode) = self.options.zscore_mode {
                spec.zscore_mode = mode;
            }
            specs.push((spec, entry.clone()));
        }
        Ok(specs)
    }

    fn input_paths(&self) -> Vec<String> {
        let mut inputs = vec![self.config_path.clone()];
        for frame in &self.config.frames {
            inputs.push(frame.data.display().to_string());
            inputs.push(frame.schema.display().to_string());
        }
        for crosswalk in &self.config.crosswalks {
            inputs.push(crosswalk.path.display().to_string());
        }
        for spec in self.config.specs.iter().chain(&self.config.variants) {
            inputs.push(spec.path().display().to_string());
        }
        for impact in &self.config.impacts {
            inputs.push(impact.input.display().to_string());
            if let Some(p) = &impact.populations_path {
                inputs.push(p.display().to_string());
            }
        }
        for ranking in &self.config.rankings {
            if let Some(p) = &ranking.path {
                inputs.push(p.display().to_string());
            }
        }
        inputs.sort();
        inputs.dedup();
        inputs
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_path: String,
    config_sha256: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    options: ManifestOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
}

#[derive(Serialize)]
struct ManifestOptions {
    zscore_mode: Option<String>,
    months: Vec<u32>,
    window_start: String,
    window_end: String,
    quintile_epsilon: f64,
    fixed_universe: bool,
    jump_threshold: u8,
}

/// Tracks files written under the output directory for the manifest.
struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Outputs {
        Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn finish(mut self, ctx: &CommandContext, command: &str) -> CmdResult<Vec<String>> {
        self.written.push("manifest.json".to_string());
        self.written.sort();
        let manifest = Manifest {
            command: command.to_string(),
            config_path: ctx.config_path.clone(),
            config_sha256: ctx.config_sha256.clone(),
            inputs: ctx.input_paths(),
            outputs: self.written.clone(),
            options: ManifestOptions {
                zscore_mode: ctx.options.zscore_mode.map(|m| m.to_string()),
                months: ctx.options.months.months().collect(),
                window_start: ctx.options.window.start.to_string(),
                window_end: ctx.options.window.end.to_string(),
                quintile_epsilon: ctx.options.quintile_epsilon,
                fixed_universe: ctx.options.fixed_universe,
                jump_threshold: ctx.options.jump_threshold,
            },
            timestamp: if ctx.stamp {
                Some(chrono::Utc::now().to_rfc3339())
            } else {
                None
            },
        };
        compute_err(io::write_json(&self.dir.join("manifest.json"), &manifest))?;
        Ok(self.written)
    }
}

/// Make a label safe as a file-name stem.
fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn find_frame<'a>(
    frames: &'a [(String, SpatialFrame)],
    scale: &str,
) -> CmdResult<&'a SpatialFrame> {
    frames
        .iter()
        .find(|(s, _)| s == scale)
        .map(|(_, f)| f)
        .ok_or_else(|| CmdError::Config(format!("scale `{scale}` is not declared in frames")))
}

/// Scales a spec entry targets: its own list, or every declared frame.
fn target_scales(entry: &SpecEntry, frames: &[(String, SpatialFrame)]) -> Vec<String> {
    if entry.scales().is_empty() {
        frames.iter().map(|(s, _)| s.clone()).collect()
    } else {
        entry.scales().to_vec()
    }
}

/// `rank`: evaluate every spec on its target frames; one CSV plus one
/// JSON sidecar per (spec, frame).
pub fn cmd_rank(ctx: &CommandContext) -> CmdResult<Vec<String>> {
    let frames = ctx.load_frames()?;
    if frames.is_empty() {
        return Err(CmdError::Config("no frames declared".to_string()));
    }
    let specs = ctx.load_specs(&ctx.config.specs)?;
    if specs.is_empty() {
        return Err(CmdError::Config("no specs declared".to_string()));
    }

    let mut outputs = Outputs::new(&ctx.out_dir);
    for (spec, entry) in &specs {
        for scale in target_scales(entry, &frames) {
            let frame = find_frame(&frames, &scale)?;
            let ranked = compute_err(rank_index(spec, frame))?;
            let label = entry.label().unwrap_or(&spec.name);
            let stem = format!("rank__{}__{}", slug(label), slug(&scale));
            outputs.path(&format!("{stem}.csv"));
            outputs.path(&format!("{stem}.meta.json"));
            compute_err(
                io::write_ranked_index(
                    &ctx.out_dir,
                    &stem,
                    &ranked,
                    spec,
                    ctx.options.quintile_epsilon,
                )
                .map(|_| ()),
            )?;
        }
    }
    outputs.finish(ctx, "rank")
}

fn write_run_outputs(
    outputs: &mut Outputs,
    prefix: &str,
    run: &VariantRun,
) -> CmdResult<()> {
    let transitions = classify_transitions(run);
    compute_err(io::write_transition_table(
        &outputs.path(&format!("{prefix}__transitions.csv")),
        run,
        &transitions,
    ))?;
    let data = plot::plot_data(run);
    compute_err(io::write_json(
        &outputs.path(&format!("{prefix}__plot.json")),
        &data,
    ))?;
    let svg = plot::scatter_svg(&data);
    let svg_path = outputs.path(&format!("{prefix}__plot.svg"));
    compute_err(io::write_text_file(&svg_path, &svg))?;
    compute_err(io::write_unit_log(
        &outputs.path(&format!("{prefix}__excluded.csv")),
        &run.excluded,
    ))?;
    Ok(())
}

/// `sensitivity`: the first spec is the base; every variant spec runs
/// against it on the first declared frame. A `scale_sensitivity` block
/// adds the fine-scale re-derivation run.
pub fn cmd_sensitivity(ctx: &CommandContext) -> CmdResult<Vec<String>> {
    let frames = ctx.load_frames()?;
    if frames.is_empty() {
        return Err(CmdError::Config("no frames declared".to_string()));
    }
    let crosswalks = ctx.load_crosswalks()?;
    let mut specs = ctx.load_specs(&ctx.config.specs)?;
    if specs.is_empty() {
        return Err(CmdError::Config(
            "sensitivity needs a base spec in `specs`".to_string(),
        ));
    }
    let (base_spec, base_entry) = specs.remove(0);
    let variants = ctx.load_specs(&ctx.config.variants)?;

    let base_scale = target_scales(&base_entry, &frames)
        .first()
        .cloned()
        .expect("frames nonempty");
    let base_frame = find_frame(&frames, &base_scale)?;
    let base_ranked = compute_err(rank_index(&base_spec, base_frame))?;

    let mut outputs = Outputs::new(&ctx.out_dir);
    let mut runs = Vec::new();
    for (spec, entry) in &variants {
        let ranked = compute_err(rank_index(spec, base_frame).map_err(|e| e.for_spec(&spec.name)))?;
        let run = compute_err(VariantRun::from_indices(&base_ranked, &ranked))?;
        let label = entry.label().unwrap_or(&spec.name);
        write_run_outputs(&mut outputs, &format!("variant__{}", slug(label)), &run)?;
        runs.push(run);
    }

    if !runs.is_empty() {
        let summary = compute_err(stability_summary(&runs, ctx.options.jump_threshold))?;
        compute_err(io::write_stability_summary(
            &outputs.path("summary.json"),
            &summary,
        ))?;
    }

    if let Some(entry) = &ctx.config.scale_sensitivity {
        let fine_frame = find_frame(&frames, &entry.fine_scale)?;
        let coarse_frame = find_frame(&frames, &entry.coarse_scale)?;
        let crosswalk = crosswalks
            .iter()
            .find(|cw| {
                cw.source_scale() == entry.fine_scale && cw.target_scale() == entry.coarse_scale
            })
            .ok_or_else(|| {
                CmdError::Config(format!(
                    "no crosswalk from `{}` to `{}` declared",
                    entry.fine_scale, entry.coarse_scale
                ))
            })?;
        let coarse_index = compute_err(rank_index(&base_spec, coarse_frame))?;
        let run = compute_err(scale_sensitivity(
            &base_spec,
            fine_frame,
            crosswalk,
            &coarse_index,
            Some(coarse_frame),
            &entry.broadcast_attributes,
        ))?;
        write_run_outputs(&mut outputs, "scale", &run)?;
    }

    outputs.finish(ctx, "sensitivity")
}

/// Build the labeled percentile rankings and quintile maps the validity
/// command correlates: one per (spec, scale) plus every precomputed
/// ranking entry, all re-ranked locally.
struct LabeledRankings {
    percentiles: Vec<Ranking>,
    quintiles: BTreeMap<String, BTreeMap<String, u8>>,
    scales: BTreeMap<String, String>,
}

fn ranking_from_column(
    label: &str,
    scale: &str,
    column: &[Option<f64>],
    ids: Vec<String>,
) -> Result<(Ranking, BTreeMap<String, u8>), Error> {
    let percentiles = percentile_rank(column)?;
    let quintiles = quintile_score(&percentiles)?;
    let values: BTreeMap<String, Option<f64>> =
        ids.iter().cloned().zip(percentiles.iter().copied()).collect();
    let quintile_map = ids
        .into_iter()
        .zip(quintiles)
        .filter_map(|(id, q)| q.map(|q| (id, q)))
        .collect();
    Ok((Ranking::new(label, scale, values), quintile_map))
}

fn collect_rankings(
    ctx: &CommandContext,
    frames: &[(String, SpatialFrame)],
    role: RankingRole,
) -> CmdResult<LabeledRankings> {
    let mut percentiles = Vec::new();
    let mut quintiles = BTreeMap::new();
    let mut scales = BTreeMap::new();
    let mut insert = |label: String,
                      scale: String,
                      ranking: Ranking,
                      quintile_map: BTreeMap<String, u8>|
     -> CmdResult<()> {
        if scales.contains_key(&label) {
            return Err(CmdError::Config(format!("duplicate ranking label `{label}`")));
        }
        scales.insert(label.clone(), scale);
        quintiles.insert(label, quintile_map);
        percentiles.push(ranking);
        Ok(())
    };

    if role == RankingRole::Index {
        for (spec, entry) in ctx.load_specs(&ctx.config.specs)? {
            for scale in target_scales(&entry, frames) {
                let frame = find_frame(frames, &scale)?;
                let ranked = compute_err(rank_index(&spec, frame))?;
                let label = format!("{}@{}", entry.label().unwrap_or(&spec.name), scale);
                let ranking = Ranking::from_percentiles(&label, &ranked);
                let quintile_map = ranked.quintile_map();
                insert(label, scale, ranking, quintile_map)?;
            }
        }
    }

    for entry in &ctx.config.rankings {
        if entry.role != role {
            continue;
        }
        let (column, ids): (Vec<Option<f64>>, Vec<String>) = match (&entry.attribute, &entry.path)
        {
            (Some(attribute), None) => {
                let frame = find_frame(frames, &entry.scale)?;
                let column = config_err(frame.attribute(attribute).map(|c| c.to_vec()))?;
                (column, frame.unit_ids().map(str::to_string).collect())
            }
            (None, Some(path)) => {
                let table = config_err(io::read_outcome_table(path))?;
                let ids: Vec<String> = table.keys().cloned().collect();
                (table.values().map(|v| Some(*v)).collect(), ids)
            }
            _ => {
                return Err(CmdError::Config(format!(
                    "ranking `{}` needs exactly one of `attribute` or `path`",
                    entry.label
                )))
            }
        };
        let (ranking, quintile_map) =
            compute_err(ranking_from_column(&entry.label, &entry.scale, &column, ids))?;
        insert(entry.label.clone(), entry.scale.clone(), ranking, quintile_map)?;
    }

    Ok(LabeledRankings {
        percentiles,
        quintiles,
        scales,
    })
}

/// Units of `base_scale` covered with a value by every ranking, mapping
/// cross-scale rankings through the crosswalks.
fn fixed_universe(
    rankings: &[Ranking],
    crosswalks: &[Crosswalk],
    base_scale: &str,
    base_ids: &BTreeSet<String>,
) -> CmdResult<BTreeSet<String>> {
    let mut universe = base_ids.clone();
    for ranking in rankings {
        let covered: BTreeSet<String> = if ranking.scale == base_scale {
            ranking
                .values
                .iter()
                .filter_map(|(id, v)| v.map(|_| id.clone()))
                .collect()
        } else {
            let crosswalk = crosswalks
                .iter()
                .find(|cw| {
                    cw.source_scale() == base_scale && cw.target_scale() == ranking.scale
                })
                .ok_or_else(|| {
                    CmdError::Config(format!(
                        "fixed universe needs a crosswalk from `{}` to `{}`",
                        base_scale, ranking.scale
                    ))
                })?;
            base_ids
                .iter()
                .filter(|id| {
                    crosswalk
                        .target_of(id)
                        .and_then(|(parent, _)| ranking.values.get(parent).copied().flatten())
                        .is_some()
                })
                .cloned()
                .collect()
        };
        universe.retain(|id| covered.contains(id));
    }
    Ok(universe)
}

/// Alignment rows for every same-scale pair of quintile columns,
/// restricted to the units both sides scored.
#[derive(Serialize)]
struct AlignmentEntry {
    label_a: String,
    label_b: String,
    percent: f64,
    n: usize,
}

fn alignment_entries(
    rankings: &LabeledRankings,
    universe: Option<&BTreeSet<String>>,
) -> Vec<AlignmentEntry> {
    let labels: Vec<&String> = rankings.quintiles.keys().collect();
    let mut entries = Vec::new();
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            let (a, b) = (labels[i], labels[j]);
            if rankings.scales[a] != rankings.scales[b] {
                continue;
            }
            let qa = &rankings.quintiles[a];
            let qb = &rankings.quintiles[b];
            let common: BTreeSet<&String> = qa
                .keys()
                .filter(|id| qb.contains_key(*id))
                .filter(|id| universe.is_none_or(|u| u.contains(*id)))
                .collect();
            if common.is_empty() {
                continue;
            }
            let fa: BTreeMap<String, u8> = qa
                .iter()
                .filter(|(id, _)| common.contains(id))
                .map(|(id, q)| (id.clone(), *q))
                .collect();
            let fb: BTreeMap<String, u8> = qb
                .iter()
                .filter(|(id, _)| common.contains(id))
                .map(|(id, q)| (id.clone(), *q))
                .collect();
            if let Ok(percent) = alignment(&fa, &fb) {
                entries.push(AlignmentEntry {
                    label_a: a.to_string(),
                    label_b: b.to_string(),
                    percent,
                    n: fa.len(),
                });
            }
        }
    }
    entries
}

/// `validity`: correlation matrix over all index rankings, alignment for
/// same-scale pairs, impact-versus-index correlations when outcome
/// rankings are configured, and a per-variant report when variants are.
pub fn cmd_validity(ctx: &CommandContext) -> CmdResult<Vec<String>> {
    let frames = ctx.load_frames()?;
    if frames.is_empty() {
        return Err(CmdError::Config("no frames declared".to_string()));
    }
    let crosswalks = ctx.load_crosswalks()?;

    let index_rankings = collect_rankings(ctx, &frames, RankingRole::Index)?;
    let impact_rankings = collect_rankings(ctx, &frames, RankingRole::Impact)?;

    let universe = if ctx.options.fixed_universe {
        let base_scale = frames[0].0.clone();
        let base_ids: BTreeSet<String> =
            frames[0].1.unit_ids().map(str::to_string).collect();
        let mut all: Vec<Ranking> = index_rankings.percentiles.clone();
        all.extend(impact_rankings.percentiles.iter().cloned());
        Some(fixed_universe(&all, &crosswalks, &base_scale, &base_ids)?)
    } else {
        None
    };

    let mut outputs = Outputs::new(&ctx.out_dir);

    if index_rankings.percentiles.len() >= 2 {
        let report = compute_err(correlation_matrix(
            &index_rankings.percentiles,
            &crosswalks,
            CorrelationMethod::Both,
            universe.as_ref(),
        ))?;
        compute_err(io::write_json(&outputs.path("correlations.json"), &report))?;
        compute_err(io::write_square_matrix_csv(
            &outputs.path("matrix_spearman.csv"),
            &report,
            io::MatrixStat::Spearman,
        ))?;
        compute_err(io::write_square_matrix_csv(
            &outputs.path("matrix_kendall.csv"),
            &report,
            io::MatrixStat::Kendall,
        ))?;
    }

    let alignments = alignment_entries(&index_rankings, universe.as_ref());
    if !alignments.is_empty() {
        compute_err(io::write_json(&outputs.path("alignment.json"), &alignments))?;
        let mut table = String::from("label_a,label_b,percent,n\n");
        for entry in &alignments {
            table.push_str(&format!(
                "{},{},{},{}\n",
                entry.label_a, entry.label_b, entry.percent, entry.n
            ));
        }
        compute_err(io::write_text_file(&outputs.path("alignment.csv"), &table))?;
    }

    if !impact_rankings.percentiles.is_empty() && !index_rankings.percentiles.is_empty() {
        let report = compute_err(impact_validity(
            &index_rankings.percentiles,
            &impact_rankings.percentiles,
            &crosswalks,
            CorrelationMethod::Both,
            universe.as_ref(),
        ))?;
        compute_err(io::write_json(&outputs.path("impacts.json"), &report))?;
        compute_err(io::write_rectangular_matrix_csv(
            &outputs.path("impacts_spearman.csv"),
            &report,
            io::MatrixStat::Spearman,
        ))?;
        compute_err(io::write_rectangular_matrix_csv(
            &outputs.path("impacts_kendall.csv"),
            &report,
            io::MatrixStat::Kendall,
        ))?;
    }

    if !ctx.config.variants.is_empty() {
        let mut specs = ctx.load_specs(&ctx.config.specs)?;
        if specs.is_empty() {
            return Err(CmdError::Config(
                "variant report needs a base spec in `specs`".to_string(),
            ));
        }
        let (base_spec, base_entry) = specs.remove(0);
        let base_scale = target_scales(&base_entry, &frames)
            .first()
            .cloned()
            .expect("frames nonempty");
        let base_frame = find_frame(&frames, &base_scale)?;
        let base_ranked = compute_err(rank_index(&base_spec, base_frame))?;
        let mut variant_indices = Vec::new();
        for (spec, _) in ctx.load_specs(&ctx.config.variants)? {
            variant_indices
                .push(compute_err(rank_index(&spec, base_frame).map_err(|e| e.for_spec(&spec.name)))?);
        }
        let report = compute_err(variant_report(&base_ranked, &variant_indices))?;
        compute_err(io::write_json(&outputs.path("variant_report.json"), &report))?;
        compute_err(io::write_variant_report_csv(
            &outputs.path("variant_report.csv"),
            &report,
        ))?;
    }

    outputs.finish(ctx, "validity")
}

fn hydrant_populations(
    entry: &ImpactEntry,
    frames: &[(String, SpatialFrame)],
) -> CmdResult<BTreeMap<String, f64>> {
    match (&entry.populations_scale, &entry.populations_path) {
        (Some(scale), None) => {
            let frame = find_frame(frames, scale)?;
            let populations = config_err(frame.populations())?;
            Ok(frame
                .unit_ids()
                .zip(populations)
                .filter_map(|(id, p)| p.map(|p| (id.to_string(), p)))
                .collect())
        }
        (None, Some(path)) => config_err(io::read_outcome_table(path)),
        _ => Err(CmdError::Config(format!(
            "pipeline `{}` needs exactly one of `populations_scale` or `populations_path`",
            entry.name
        ))),
    }
}

/// Appendix-style default hydrant descriptor allowlist.
pub fn default_hydrant_allowlist() -> BTreeSet<String> {
    [
        "Hydrant Running Full (WA4)",
        "Hydrant Running (WC3)",
        "Illegal Use Of A Hydrant (CIN)",
        "Request To Open A Hydrant (WC4)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run_pipeline(
    ctx: &CommandContext,
    entry: &ImpactEntry,
    frames: &[(String, SpatialFrame)],
) -> CmdResult<PipelineOutput> {
    let columns = io::ColumnMap::new(entry.columns.clone());
    let window = &ctx.options.window;
    let months = &ctx.options.months;
    match entry.pipeline.as_str() {
        "outage" => {
            let intervals = config_err(io::read_outage_csv(&entry.input, &columns))?;
            compute_err(impacts::outage_rate(&intervals, window, months))
        }
        "ems" => {
            let records = config_err(io::read_dispatch_csv(&entry.input, &columns))?;
            let call_type = entry.final_call_type.as_deref().unwrap_or("HEAT");
            compute_err(impacts::ems_heat_counts(&records, call_type, window, months))
        }
        "hydrant" => {
            let records = config_err(io::read_complaint_csv(&entry.input, &columns))?;
            let populations = hydrant_populations(entry, frames)?;
            let allowlist: BTreeSet<String> = entry
                .allowlist
                .clone()
                .map(|list| list.into_iter().collect())
                .unwrap_or_else(default_hydrant_allowlist);
            let markers = entry
                .duplicate_markers
                .clone()
                .unwrap_or_else(|| vec!["duplicate".to_string(), "Duplicate".to_string()]);
            compute_err(impacts::hydrant_complaints(
                &records,
                &populations,
                &allowlist,
                &markers,
                window,
                months,
            ))
        }
        other => Err(CmdError::Config(format!("unknown pipeline `{other}`"))),
    }
}

/// `ingest`: run each configured impact pipeline; per pipeline, write the
/// outcome table, the exclusion log, the skipped-unit log, and a summary.
pub fn cmd_ingest(ctx: &CommandContext) -> CmdResult<Vec<String>> {
    if ctx.config.impacts.is_empty() {
        return Err(CmdError::Config("no impact pipelines declared".to_string()));
    }
    let frames = ctx.load_frames()?;
    let mut outputs = Outputs::new(&ctx.out_dir);
    for entry in &ctx.config.impacts {
        let output = run_pipeline(ctx, entry, &frames)?;
        debug_assert!(output.conserves_records());
        let stem = slug(&entry.name);
        compute_err(io::write_outcome_table(
            &outputs.path(&format!("{stem}.csv")),
            &output.values,
        ))?;
        compute_err(io::write_exclusion_log(
            &outputs.path(&format!("{stem}.exclusions.csv")),
            &output.exclusions,
        ))?;
        compute_err(io::write_exclusion_log(
            &outputs.path(&format!("{stem}.skipped_units.csv")),
            &output.skipped_units,
        ))?;
        compute_err(io::write_json(
            &outputs.path(&format!("{stem}.summary.json")),
            &io::pipeline_summary(&output),
        ))?;
    }
    outputs.finish(ctx, "ingest")
}
