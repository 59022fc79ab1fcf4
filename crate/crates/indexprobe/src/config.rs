//! Run configuration: the JSON document driving every command, plus the
//! CLI override and option-resolution logic.
//!
//! Relative paths inside a config file resolve against the config file's
//! own directory, so a config travels with its data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::impacts::{DateWindow, MonthFilter};
use crate::index::ZscoreMode;

/// One frame declaration: scale label, data CSV, schema JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameEntry {
    pub scale: String,
    pub data: PathBuf,
    pub schema: PathBuf,
    /// Drop units with zero or missing population before any analysis.
    #[serde(default)]
    pub filter_populated: bool,
}

/// One crosswalk declaration. The file holds `source_id,target_id,weight`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosswalkEntry {
    pub source_scale: String,
    pub target_scale: String,
    pub path: PathBuf,
}

/// Spec reference: either a bare path or a path with scale targeting.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpecEntry {
    Path(PathBuf),
    Detailed(SpecEntryDetailed),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEntryDetailed {
    pub path: PathBuf,
    /// Scales to evaluate on; defaults to every declared frame.
    #[serde(default)]
    pub scales: Vec<String>,
    /// Ranking label; defaults to the spec's name.
    #[serde(default)]
    pub label: Option<String>,
}

impl SpecEntry {
    pub fn path(&self) -> &Path {
        match self {
            SpecEntry::Path(p) => p,
            SpecEntry::Detailed(d) => &d.path,
        }
    }

    pub fn scales(&self) -> &[String] {
        match self {
            SpecEntry::Path(_) => &[],
            SpecEntry::Detailed(d) => &d.scales,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            SpecEntry::Path(_) => None,
            SpecEntry::Detailed(d) => d.label.as_deref(),
        }
    }

    fn path_mut(&mut self) -> &mut PathBuf {
        match self {
            SpecEntry::Path(p) => p,
            SpecEntry::Detailed(d) => &mut d.path,
        }
    }
}

/// Whether a precomputed ranking plays the index or the outcome role in
/// validity reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingRole {
    #[default]
    Index,
    Impact,
}

/// A precomputed ranking source: a frame attribute or an outcome table.
/// Values are percentile-ranked locally before use.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingEntry {
    pub label: String,
    pub scale: String,
    #[serde(default)]
    pub attribute: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub role: RankingRole,
}

/// One impact pipeline invocation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactEntry {
    /// `outage`, `ems`, or `hydrant`.
    pub pipeline: String,
    /// Output file stem and ranking label.
    pub name: String,
    pub input: PathBuf,
    /// Logical-field to column-header overrides.
    #[serde(default)]
    pub columns: BTreeMap<String, String>,
    /// Hydrant descriptor allowlist override.
    #[serde(default)]
    pub allowlist: Option<Vec<String>>,
    /// Substrings of resolution text marking duplicates.
    #[serde(default)]
    pub duplicate_markers: Option<Vec<String>>,
    /// Dispatch final call type to count.
    #[serde(default)]
    pub final_call_type: Option<String>,
    /// Population source for rate pipelines: a declared frame's scale...
    #[serde(default)]
    pub populations_scale: Option<String>,
    /// ...or a `unit_id,value` table.
    #[serde(default)]
    pub populations_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowEntry {
    pub start: String,
    pub end: String,
}

/// Scale-sensitivity analysis declaration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSensitivityEntry {
    pub fine_scale: String,
    pub coarse_scale: String,
    /// Attributes unavailable at the fine scale, copied down from each
    /// unit's parent before evaluation.
    #[serde(default)]
    pub broadcast_attributes: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsConfig {
    /// Override every spec's z-score denominator convention.
    pub zscore_mode: Option<ZscoreMode>,
    pub months: Option<Vec<u32>>,
    pub window: Option<WindowEntry>,
    /// Flag units whose percentile sits within this distance of a
    /// quintile threshold. 0 disables the report.
    pub quintile_epsilon: Option<f64>,
    /// Restrict validity pairings to units scored by every ranking at the
    /// first frame's scale, instead of per-pair deletion.
    pub fixed_universe: bool,
    /// Minimum quintile jump that gets flagged in stability summaries.
    pub jump_threshold: Option<u8>,
}

/// The top-level config document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub frames: Vec<FrameEntry>,
    #[serde(default)]
    pub crosswalks: Vec<CrosswalkEntry>,
    #[serde(default)]
    pub specs: Vec<SpecEntry>,
    #[serde(default)]
    pub variants: Vec<SpecEntry>,
    #[serde(default)]
    pub impacts: Vec<ImpactEntry>,
    #[serde(default)]
    pub rankings: Vec<RankingEntry>,
    pub outputs: PathBuf,
    #[serde(default)]
    pub options: OptionsConfig,
    #[serde(default)]
    pub scale_sensitivity: Option<ScaleSensitivityEntry>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("config: {e}")))
    }

    /// Anchor every relative path at `base` (the config file's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        for frame in &mut self.frames {
            anchor(&mut frame.data);
            anchor(&mut frame.schema);
        }
        for crosswalk in &mut self.crosswalks {
            anchor(&mut crosswalk.path);
        }
        for spec in self.specs.iter_mut().chain(&mut self.variants) {
            anchor(spec.path_mut());
        }
        for impact in &mut self.impacts {
            anchor(&mut impact.input);
            if let Some(p) = &mut impact.populations_path {
                anchor(p);
            }
        }
        for ranking in &mut self.rankings {
            if let Some(p) = &mut ranking.path {
                anchor(p);
            }
        }
        anchor(&mut self.outputs);
    }
}

/// CLI-provided overrides; each beats its config counterpart.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub zscore_mode: Option<ZscoreMode>,
    pub months: Option<Vec<u32>>,
    pub window: Option<(NaiveDate, NaiveDate)>,
    pub out: Option<PathBuf>,
}

/// Fully resolved options a command runs under.
#[derive(Debug, Clone)]
pub struct EffectiveOptions {
    pub zscore_mode: Option<ZscoreMode>,
    pub months: MonthFilter,
    pub window: DateWindow,
    pub quintile_epsilon: f64,
    pub fixed_universe: bool,
    pub jump_threshold: u8,
}

fn parse_config_date(text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|_| Error::Schema(format!("cannot parse date `{text}` (expected YYYY-MM-DD)")))
}

/// Default analysis window: calendar years 2021 through 2025.
pub fn default_window() -> DateWindow {
    DateWindow::new(
        NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date"),
        NaiveDate::from_ymd_opt(2025, 12, 31).expect("valid date"),
    )
    .expect("valid window")
}

/// Merge config options with CLI overrides into the effective set.
pub fn resolve_options(config: &OptionsConfig, overrides: &Overrides) -> Result<EffectiveOptions> {
    let zscore_mode = overrides.zscore_mode.or(config.zscore_mode);

    let months = match (&overrides.months, &config.months) {
        (Some(m), _) => MonthFilter::new(m.iter().copied())?,
        (None, Some(m)) => MonthFilter::new(m.iter().copied())?,
        (None, None) => MonthFilter::warm_season(),
    };

    let window = match (&overrides.window, &config.window) {
        (Some((start, end)), _) => DateWindow::new(*start, *end)?,
        (None, Some(entry)) => DateWindow::new(
            parse_config_date(&entry.start)?,
            parse_config_date(&entry.end)?,
        )?,
        (None, None) => default_window(),
    };

    let quintile_epsilon = config.quintile_epsilon.unwrap_or(0.0);
    if !(quintile_epsilon.is_finite() && quintile_epsilon >= 0.0) {
        return Err(Error::Schema(format!(
            "quintile_epsilon {quintile_epsilon} must be nonnegative"
        )));
    }

    Ok(EffectiveOptions {
        zscore_mode,
        months,
        window,
        quintile_epsilon,
        fixed_universe: config.fixed_universe,
        jump_threshold: config.jump_threshold.unwrap_or(2),
    })
}

/// Parse a CLI `--months` value: `5-9` or `5,6,7,8,9`.
pub fn parse_months_arg(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::Schema(format!("cannot parse months `{text}` (use `5-9` or `5,6,7`)"));
    if let Some((lo, hi)) = text.split_once('-') {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|m| m.trim().parse::<u32>().map_err(|_| bad()))
        .collect()
}

/// Parse a CLI `--window` value: `2021-05-01..2025-09-30`.
pub fn parse_window_arg(text: &str) -> Result<(NaiveDate, NaiveDate)> {
    let (start, end) = text.split_once("..").ok_or_else(|| {
        Error::Schema(format!(
            "cannot parse window `{text}` (use `YYYY-MM-DD..YYYY-MM-DD`)"
        ))
    })?;
    Ok((parse_config_date(start.trim())?, parse_config_date(end.trim())?))
}

/// Parse a CLI `--zscore-mode` value.
pub fn parse_zscore_mode_arg(text: &str) -> Result<ZscoreMode> {
    match text {
        "population" => Ok(ZscoreMode::Population),
        "sample" => Ok(ZscoreMode::Sample),
        other => Err(Error::Schema(format!(
            "zscore mode must be `population` or `sample`, got `{other}`"
        ))),
    }
}
