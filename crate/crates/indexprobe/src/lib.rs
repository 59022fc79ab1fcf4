//! Toolkit for building composite risk and vulnerability indices over
//! spatial units and scrutinizing them: sensitivity analysis across
//! alternative specifications and spatial scales, and validity assessment
//! via rank correlations and score alignment against other indices and
//! measured outcomes.
//!
//! The pieces compose in one direction:
//!
//! 1. [`frame`] holds spatial units and attributes at one scale, and
//!    crosswalks between scales resolved by highest overlap.
//! 2. [`index`] standardizes attributes, evaluates index specs
//!    (additive-z, hierarchical, risk-formula), and converts raw scores
//!    into tie-aware percentile ranks and quintile risk scores.
//! 3. [`sensitivity`] reruns an index under variant specs or at another
//!    spatial scale and classifies per-unit score transitions.
//! 4. [`validity`] correlates rankings (Spearman, tie-adjusted Kendall
//!    tau-b) and measures categorical score alignment.
//! 5. [`impacts`] turns raw outage/dispatch/complaint record streams into
//!    per-unit outcome columns with full exclusion audit trails.
//!
//! The `examples/` directory walks through each capability end to end;
//! the `indexprobe` binary wraps the same library calls behind `rank`,
//! `sensitivity`, `validity`, and `ingest` subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod frame;
pub mod impacts;
pub mod index;
pub mod io;
pub mod plot;
pub mod sensitivity;
pub mod validity;

pub use error::{Error, Result};
pub use frame::{
    broadcast_parent, reaggregate, AggregateMode, Aggregated, Crosswalk, FrameRow, RawLink,
    SpatialFrame, SpatialUnit,
};
pub use index::{
    evaluate_hierarchical, evaluate_risk_formula, evaluate_spec, percentile_rank, quintile_score,
    rank_index, zscore, IndexSpec, IndexTerm, Method, RankedIndex, RankedUnit, RiskInputs,
    RiskTransform, Sign, ZscoreMode,
};
pub use sensitivity::{
    classify_transitions, run_variants, scale_sensitivity, stability_summary, Direction,
    StabilitySummary, TransitionRecord, VariantRun,
};
pub use validity::{
    alignment, correlation_matrix, impact_validity, kendall_tau, pair, spearman, variant_report,
    CorrelationMethod, PairedRanking, Ranking, ValidityReport,
};
pub use impacts::{
    ems_heat_counts, hydrant_complaints, impact_ranking, outage_rate, ComplaintRecord,
    DateWindow, DispatchRecord, DistributionSystem, MonthFilter, OutageInterval, PipelineOutput,
};
