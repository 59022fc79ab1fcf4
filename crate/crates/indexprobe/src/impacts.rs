//! Heat-impact record pipelines: power-outage intervals, emergency
//! dispatch records, and hydrant complaint records become per-unit outcome
//! columns ready for ranking.
//!
//! Every pipeline is single-pass and conservative: each input record is
//! either included in the output or logged with an exclusion reason, so
//! `included + excluded == input` always holds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::percentile_rank;

/// Outage counts come from two kinds of distribution systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionSystem {
    Network,
    Radial,
}

impl fmt::Display for DistributionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSystem::Network => write!(f, "network"),
            DistributionSystem::Radial => write!(f, "radial"),
        }
    }
}

/// One 30-minute outage observation for a locality service area.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageInterval {
    pub locality_id: String,
    pub timestamp: NaiveDateTime,
    pub system: DistributionSystem,
    pub customers_out: f64,
    pub customers_total: f64,
}

impl OutageInterval {
    /// Validates the record invariants: a positive customer base, outages
    /// within it, and a timestamp on a 30-minute boundary.
    pub fn new(
        locality_id: &str,
        timestamp: NaiveDateTime,
        system: DistributionSystem,
        customers_out: f64,
        customers_total: f64,
    ) -> Result<OutageInterval> {
        if !(customers_total.is_finite() && customers_total > 0.0) {
            return Err(Error::Record(format!(
                "locality `{locality_id}` at {timestamp}: customers_total {customers_total} must be positive"
            )));
        }
        if !(customers_out.is_finite() && customers_out >= 0.0) {
            return Err(Error::Record(format!(
                "locality `{locality_id}` at {timestamp}: customers_out {customers_out} must be nonnegative"
            )));
        }
        if customers_out > customers_total {
            return Err(Error::Record(format!(
                "locality `{locality_id}` at {timestamp}: {customers_out} customers out of {customers_total}"
            )));
        }
        if !timestamp.time().minute().is_multiple_of(30) || timestamp.time().second() != 0 {
            return Err(Error::Record(format!(
                "locality `{locality_id}`: timestamp {timestamp} is not on a 30-minute boundary"
            )));
        }
        Ok(OutageInterval {
            locality_id: locality_id.to_string(),
            timestamp,
            system,
            customers_out,
            customers_total,
        })
    }
}

/// One emergency dispatch record. Records lacking a date or zipcode exist
/// but are never counted.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchRecord {
    pub incident_id: String,
    pub date: Option<NaiveDate>,
    pub zipcode: Option<String>,
    pub initial_call_type: String,
    pub final_call_type: String,
}

/// One service complaint record.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplaintRecord {
    pub complaint_id: String,
    pub created_date: NaiveDate,
    pub tract_id: Option<String>,
    pub descriptor: String,
    pub resolution: String,
}

/// Inclusive calendar window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<DateWindow> {
        if end < start {
            return Err(Error::Record(format!(
                "date window {start}..{end} ends before it starts"
            )));
        }
        Ok(DateWindow { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    fn iter(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        let days = (self.end - self.start).num_days();
        (0..=days).map(move |d| self.start + Duration::days(d))
    }
}

/// Calendar months that count toward a pipeline's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonthFilter(BTreeSet<u32>);

impl MonthFilter {
    pub fn new(months: impl IntoIterator<Item = u32>) -> Result<MonthFilter> {
        let set: BTreeSet<u32> = months.into_iter().collect();
        if set.is_empty() || set.iter().any(|m| !(1..=12).contains(m)) {
            return Err(Error::Record(format!(
                "month filter {set:?} must be a nonempty subset of 1..=12"
            )));
        }
        Ok(MonthFilter(set))
    }

    /// May through September.
    pub fn warm_season() -> MonthFilter {
        MonthFilter((5..=9).collect())
    }

    pub fn contains(&self, month: u32) -> bool {
        self.0.contains(&month)
    }

    pub fn months(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

impl Default for MonthFilter {
    fn default() -> Self {
        MonthFilter::warm_season()
    }
}

/// Why a record was excluded from a pipeline's output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    RadialDuplicate,
    OutsideWindow,
    OutsideMonths,
    WrongCallType,
    MissingDate,
    MissingZipcode,
    MissingTract,
    DescriptorNotListed,
    DuplicateResolution,
    ZeroPopulation,
    UnknownPopulation,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExclusionReason::RadialDuplicate => "radial_duplicate",
            ExclusionReason::OutsideWindow => "outside_window",
            ExclusionReason::OutsideMonths => "outside_months",
            ExclusionReason::WrongCallType => "wrong_call_type",
            ExclusionReason::MissingDate => "missing_date",
            ExclusionReason::MissingZipcode => "missing_zipcode",
            ExclusionReason::MissingTract => "missing_tract",
            ExclusionReason::DescriptorNotListed => "descriptor_not_listed",
            ExclusionReason::DuplicateResolution => "duplicate_resolution",
            ExclusionReason::ZeroPopulation => "zero_population",
            ExclusionReason::UnknownPopulation => "unknown_population",
        };
        write!(f, "{s}")
    }
}

/// One excluded record: which one and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub record_id: String,
    pub reason: ExclusionReason,
}

/// A pipeline's per-unit output column plus its audit trail.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Per-unit outcome values, ascending by unit id.
    pub values: BTreeMap<String, f64>,
    pub input_count: usize,
    pub included_count: usize,
    /// One entry per excluded input record.
    pub exclusions: Vec<Exclusion>,
    /// Units (not records) dropped from the output, e.g. for lacking a
    /// usable population count.
    pub skipped_units: Vec<Exclusion>,
}

impl PipelineOutput {
    /// `included + excluded == input` must always hold.
    pub fn conserves_records(&self) -> bool {
        self.included_count + self.exclusions.len() == self.input_count
    }
}

fn outage_record_id(interval: &OutageInterval) -> String {
    format!(
        "{}/{}/{}",
        interval.locality_id,
        interval.timestamp.format("%Y-%m-%dT%H:%M"),
        interval.system
    )
}

/// Average daily maximum outage rate per locality.
///
/// Per locality and day, the rate is the maximum over 30-minute slots of
/// `customers_out / customers_total`; the output averages those daily
/// maxima over every day of `window` whose month passes `months`, counting
/// days with no record as zero. A radial record that exactly matches a
/// network record (same locality, slot, and counts) with more than 10
/// customers out is dropped as a duplicated count.
pub fn outage_rate(
    intervals: &[OutageInterval],
    window: &DateWindow,
    months: &MonthFilter,
) -> Result<PipelineOutput> {
    let n_days = window.iter().filter(|d| months.contains(d.month())).count();
    if n_days == 0 {
        return Err(Error::InsufficientData(format!(
            "window {}..{} contains no days in the month filter",
            window.start, window.end
        )));
    }

    // network-side keys for the radial dedup rule; counts compared exactly
    let network_keys: BTreeSet<(&str, NaiveDateTime, u64, u64)> = intervals
        .iter()
        .filter(|i| i.system == DistributionSystem::Network)
        .map(|i| {
            (
                i.locality_id.as_str(),
                i.timestamp,
                i.customers_out.to_bits(),
                i.customers_total.to_bits(),
            )
        })
        .collect();

    let mut daily_max: BTreeMap<(String, NaiveDate), f64> = BTreeMap::new();
    let mut localities: BTreeSet<String> = BTreeSet::new();
    let mut exclusions = Vec::new();
    let mut included = 0usize;

    for interval in intervals {
        let id = outage_record_id(interval);
        if interval.system == DistributionSystem::Radial
            && interval.customers_out > 10.0
            && network_keys.contains(&(
                interval.locality_id.as_str(),
                interval.timestamp,
                interval.customers_out.to_bits(),
                interval.customers_total.to_bits(),
            ))
        {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::RadialDuplicate,
            });
            continue;
        }
        let date = interval.timestamp.date();
        if !window.contains(date) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::OutsideWindow,
            });
            continue;
        }
        if !months.contains(date.month()) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::OutsideMonths,
            });
            continue;
        }
        included += 1;
        localities.insert(interval.locality_id.clone());
        let rate = interval.customers_out / interval.customers_total;
        let slot = daily_max
            .entry((interval.locality_id.clone(), date))
            .or_insert(0.0);
        if rate > *slot {
            *slot = rate;
        }
    }

    let mut values = BTreeMap::new();
    for locality in localities {
        let total: f64 = daily_max
            .range((locality.clone(), window.start)..=(locality.clone(), window.end))
            .map(|(_, max)| *max)
            .sum();
        values.insert(locality, total / n_days as f64);
    }

    Ok(PipelineOutput {
        values,
        input_count: intervals.len(),
        included_count: included,
        exclusions,
        skipped_units: Vec::new(),
    })
}

/// Count dispatch records per zipcode whose final call type equals
/// `final_call_type` exactly; counts stay raw (no population scaling).
/// Records missing a date or zipcode are excluded and logged, as are
/// records qualifying only by initial call type.
pub fn ems_heat_counts(
    records: &[DispatchRecord],
    final_call_type: &str,
    window: &DateWindow,
    months: &MonthFilter,
) -> Result<PipelineOutput> {
    let mut values: BTreeMap<String, f64> = BTreeMap::new();
    let mut exclusions = Vec::new();
    let mut included = 0usize;

    for record in records {
        let id = record.incident_id.clone();
        if record.final_call_type != final_call_type {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::WrongCallType,
            });
            continue;
        }
        let date = match record.date {
            Some(d) => d,
            None => {
                exclusions.push(Exclusion {
                    record_id: id,
                    reason: ExclusionReason::MissingDate,
                });
                continue;
            }
        };
        let zipcode = match &record.zipcode {
            Some(z) if !z.is_empty() => z.clone(),
            _ => {
                exclusions.push(Exclusion {
                    record_id: id,
                    reason: ExclusionReason::MissingZipcode,
                });
                continue;
            }
        };
        if !window.contains(date) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::OutsideWindow,
            });
            continue;
        }
        if !months.contains(date.month()) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::OutsideMonths,
            });
            continue;
        }
        included += 1;
        *values.entry(zipcode).or_insert(0.0) += 1.0;
    }

    Ok(PipelineOutput {
        values,
        input_count: records.len(),
        included_count: included,
        exclusions,
        skipped_units: Vec::new(),
    })
}

/// Count allowlisted complaints per tract and scale to a rate per 1,000
/// residents. Complaints whose resolution text contains a configured
/// duplicate marker are excluded, as are complaints without a known
/// tract. Tracts present in `populations` with a positive count are
/// zero-filled; others are skipped and logged as units.
pub fn hydrant_complaints(
    records: &[ComplaintRecord],
    populations: &BTreeMap<String, f64>,
    allowlist: &BTreeSet<String>,
    duplicate_markers: &[String],
    window: &DateWindow,
    months: &MonthFilter,
) -> Result<PipelineOutput> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut exclusions = Vec::new();
    let mut included = 0usize;

    for record in records {
        let id = record.complaint_id.clone();
        if !allowlist.contains(&record.descriptor) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::DescriptorNotListed,
            });
            continue;
        }
        if duplicate_markers
            .iter()
            .any(|marker| record.resolution.contains(marker))
        {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::DuplicateResolution,
            });
            continue;
        }
        let tract = match &record.tract_id {
            Some(t) if !t.is_empty() => t.clone(),
            _ => {
                exclusions.push(Exclusion {
                    record_id: id,
                    reason: ExclusionReason::MissingTract,
                });
                continue;
            }
        };
        if !window.contains(record.created_date) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::OutsideWindow,
            });
            continue;
        }
        if !months.contains(record.created_date.month()) {
            exclusions.push(Exclusion {
                record_id: id,
                reason: ExclusionReason::OutsideMonths,
            });
            continue;
        }
        match populations.get(&tract) {
            Some(p) if *p > 0.0 => {
                included += 1;
                *counts.entry(tract).or_insert(0.0) += 1.0;
            }
            Some(_) => {
                exclusions.push(Exclusion {
                    record_id: id,
                    reason: ExclusionReason::ZeroPopulation,
                });
            }
            None => {
                exclusions.push(Exclusion {
                    record_id: id,
                    reason: ExclusionReason::UnknownPopulation,
                });
            }
        }
    }

    let mut values = BTreeMap::new();
    let mut skipped_units = Vec::new();
    for (tract, population) in populations {
        if *population > 0.0 {
            let count = counts.get(tract).copied().unwrap_or(0.0);
            values.insert(tract.clone(), 1000.0 * count / population);
        } else {
            skipped_units.push(Exclusion {
                record_id: tract.clone(),
                reason: ExclusionReason::ZeroPopulation,
            });
        }
    }

    Ok(PipelineOutput {
        values,
        input_count: records.len(),
        included_count: included,
        exclusions,
        skipped_units,
    })
}

/// Tie-aware percentile ranks over a per-unit outcome column.
pub fn impact_ranking(values: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let column: Vec<Option<f64>> = values.values().map(|v| Some(*v)).collect();
    let percentiles = percentile_rank(&column)?;
    Ok(values
        .keys()
        .zip(percentiles)
        .map(|(id, p)| (id.clone(), p.expect("no missing inputs")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn slot(y: i32, m: u32, d: u32, h: u32, min: u32) -> NaiveDateTime {
        date(y, m, d).and_hms_opt(h, min, 0).unwrap()
    }

    fn window_2021() -> DateWindow {
        DateWindow::new(date(2021, 5, 1), date(2021, 5, 10)).unwrap()
    }

    fn outage(
        locality: &str,
        ts: NaiveDateTime,
        system: DistributionSystem,
        out: f64,
        total: f64,
    ) -> OutageInterval {
        OutageInterval::new(locality, ts, system, out, total).unwrap()
    }

    #[test]
    fn daily_max_then_mean() {
        let intervals = vec![
            outage("L1", slot(2021, 5, 1, 10, 0), DistributionSystem::Network, 10.0, 100.0),
            outage("L1", slot(2021, 5, 1, 10, 30), DistributionSystem::Network, 30.0, 100.0),
            outage("L1", slot(2021, 5, 2, 11, 0), DistributionSystem::Network, 30.0, 100.0),
            outage("L1", slot(2021, 5, 2, 12, 0), DistributionSystem::Network, 10.0, 100.0),
        ];
        let window = DateWindow::new(date(2021, 5, 1), date(2021, 5, 2)).unwrap();
        let out = outage_rate(&intervals, &window, &MonthFilter::warm_season()).unwrap();
        // daily maxima 0.3 and 0.3 over 2 days
        assert!((out.values["L1"] - 0.3).abs() < 1e-15);
        assert!(out.conserves_records());
    }

    #[test]
    fn days_without_records_count_as_zero() {
        let intervals = vec![outage(
            "L1",
            slot(2021, 5, 1, 10, 0),
            DistributionSystem::Network,
            30.0,
            100.0,
        )];
        let out = outage_rate(&intervals, &window_2021(), &MonthFilter::warm_season()).unwrap();
        // one 0.3 day over a 10-day window
        assert!((out.values["L1"] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn radial_duplicate_above_threshold_dropped() {
        let ts = slot(2021, 5, 1, 10, 0);
        let intervals = vec![
            outage("L1", ts, DistributionSystem::Network, 25.0, 100.0),
            outage("L1", ts, DistributionSystem::Radial, 25.0, 100.0),
        ];
        let out = outage_rate(&intervals, &window_2021(), &MonthFilter::warm_season()).unwrap();
        assert_eq!(out.included_count, 1);
        assert_eq!(out.exclusions.len(), 1);
        assert_eq!(out.exclusions[0].reason, ExclusionReason::RadialDuplicate);
    }

    #[test]
    fn radial_duplicate_at_or_below_threshold_kept() {
        let ts = slot(2021, 5, 1, 10, 0);
        for out_count in [8.0, 10.0] {
            let intervals = vec![
                outage("L1", ts, DistributionSystem::Network, out_count, 100.0),
                outage("L1", ts, DistributionSystem::Radial, out_count, 100.0),
            ];
            let out =
                outage_rate(&intervals, &window_2021(), &MonthFilter::warm_season()).unwrap();
            assert_eq!(out.included_count, 2, "customers_out = {out_count}");
        }
    }

    #[test]
    fn radial_without_matching_network_kept() {
        let intervals = vec![outage(
            "L1",
            slot(2021, 5, 1, 10, 0),
            DistributionSystem::Radial,
            25.0,
            100.0,
        )];
        let out = outage_rate(&intervals, &window_2021(), &MonthFilter::warm_season()).unwrap();
        assert_eq!(out.included_count, 1);
    }

    #[test]
    fn outage_order_invariance() {
        let mut intervals = vec![
            outage("L1", slot(2021, 5, 1, 10, 0), DistributionSystem::Network, 25.0, 100.0),
            outage("L1", slot(2021, 5, 1, 10, 0), DistributionSystem::Radial, 25.0, 100.0),
            outage("L2", slot(2021, 5, 3, 9, 30), DistributionSystem::Network, 5.0, 50.0),
        ];
        let forward = outage_rate(&intervals, &window_2021(), &MonthFilter::warm_season()).unwrap();
        intervals.reverse();
        let backward =
            outage_rate(&intervals, &window_2021(), &MonthFilter::warm_season()).unwrap();
        assert_eq!(forward.values, backward.values);
    }

    #[test]
    fn zero_customer_base_is_a_record_error() {
        let err = OutageInterval::new(
            "L1",
            slot(2021, 5, 1, 10, 0),
            DistributionSystem::Network,
            0.0,
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Record(_)));
    }

    #[test]
    fn off_boundary_timestamp_rejected() {
        let ts = date(2021, 5, 1).and_hms_opt(10, 15, 0).unwrap();
        assert!(OutageInterval::new("L1", ts, DistributionSystem::Network, 1.0, 10.0).is_err());
    }

    fn dispatch(
        id: &str,
        d: Option<NaiveDate>,
        zip: Option<&str>,
        initial: &str,
        final_type: &str,
    ) -> DispatchRecord {
        DispatchRecord {
            incident_id: id.to_string(),
            date: d,
            zipcode: zip.map(|z| z.to_string()),
            initial_call_type: initial.to_string(),
            final_call_type: final_type.to_string(),
        }
    }

    #[test]
    fn ems_counts_final_call_type_only() {
        let records = vec![
            dispatch("1", Some(date(2021, 6, 1)), Some("10001"), "INJURY", "HEAT"),
            dispatch("2", Some(date(2021, 6, 2)), Some("10001"), "HEAT", "INJURY"),
            dispatch("3", Some(date(2021, 6, 3)), None, "HEAT", "HEAT"),
        ];
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let out = ems_heat_counts(&records, "HEAT", &window, &MonthFilter::warm_season()).unwrap();
        assert_eq!(out.values.get("10001"), Some(&1.0));
        assert_eq!(out.included_count, 1);
        assert!(out
            .exclusions
            .iter()
            .any(|e| e.record_id == "2" && e.reason == ExclusionReason::WrongCallType));
        assert!(out
            .exclusions
            .iter()
            .any(|e| e.record_id == "3" && e.reason == ExclusionReason::MissingZipcode));
        assert!(out.conserves_records());
    }

    #[test]
    fn ems_missing_date_excluded() {
        let records = vec![dispatch("1", None, Some("10001"), "HEAT", "HEAT")];
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let out = ems_heat_counts(&records, "HEAT", &window, &MonthFilter::warm_season()).unwrap();
        assert_eq!(out.included_count, 0);
        assert_eq!(out.exclusions[0].reason, ExclusionReason::MissingDate);
    }

    #[test]
    fn ems_month_filter_applies() {
        let records = vec![
            dispatch("1", Some(date(2021, 2, 1)), Some("10001"), "HEAT", "HEAT"),
            dispatch("2", Some(date(2021, 7, 1)), Some("10001"), "HEAT", "HEAT"),
        ];
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let out = ems_heat_counts(&records, "HEAT", &window, &MonthFilter::warm_season()).unwrap();
        assert_eq!(out.values["10001"], 1.0);
        assert_eq!(out.exclusions[0].reason, ExclusionReason::OutsideMonths);
    }

    fn complaint(id: &str, d: NaiveDate, tract: Option<&str>, descriptor: &str, resolution: &str) -> ComplaintRecord {
        ComplaintRecord {
            complaint_id: id.to_string(),
            created_date: d,
            tract_id: tract.map(|t| t.to_string()),
            descriptor: descriptor.to_string(),
            resolution: resolution.to_string(),
        }
    }

    fn hydrant_allowlist() -> BTreeSet<String> {
        ["Hydrant Running (WC3)", "Hydrant Running Full (WA4)"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn hydrant_rate_per_thousand() {
        let records: Vec<ComplaintRecord> = (0..5)
            .map(|i| {
                complaint(
                    &format!("c{i}"),
                    date(2021, 6, 1),
                    Some("T1"),
                    "Hydrant Running (WC3)",
                    "The Department responded.",
                )
            })
            .collect();
        let populations = BTreeMap::from([("T1".to_string(), 2000.0)]);
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let out = hydrant_complaints(
            &records,
            &populations,
            &hydrant_allowlist(),
            &["duplicate".to_string()],
            &window,
            &MonthFilter::warm_season(),
        )
        .unwrap();
        assert_eq!(out.values["T1"], 2.5);
    }

    #[test]
    fn hydrant_descriptor_allowlist_and_duplicates() {
        let records = vec![
            complaint("1", date(2021, 6, 1), Some("T1"), "Hydrant Running (WC3)", "ok"),
            complaint("2", date(2021, 6, 1), Some("T1"), "car blocking a hydrant", "ok"),
            complaint(
                "3",
                date(2021, 6, 1),
                Some("T1"),
                "Hydrant Running Full (WA4)",
                "The complaint is a duplicate of another complaint.",
            ),
            complaint("4", date(2021, 6, 1), None, "Hydrant Running (WC3)", "ok"),
        ];
        let populations = BTreeMap::from([("T1".to_string(), 1000.0)]);
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let out = hydrant_complaints(
            &records,
            &populations,
            &hydrant_allowlist(),
            &["duplicate".to_string()],
            &window,
            &MonthFilter::warm_season(),
        )
        .unwrap();
        assert_eq!(out.values["T1"], 1.0);
        assert_eq!(out.exclusions.len(), 3);
        let reasons: Vec<ExclusionReason> = out.exclusions.iter().map(|e| e.reason).collect();
        assert!(reasons.contains(&ExclusionReason::DescriptorNotListed));
        assert!(reasons.contains(&ExclusionReason::DuplicateResolution));
        assert!(reasons.contains(&ExclusionReason::MissingTract));
        assert!(out.conserves_records());
    }

    #[test]
    fn hydrant_zero_population_tract_skipped() {
        let records = vec![complaint(
            "1",
            date(2021, 6, 1),
            Some("T0"),
            "Hydrant Running (WC3)",
            "ok",
        )];
        let populations =
            BTreeMap::from([("T0".to_string(), 0.0), ("T1".to_string(), 500.0)]);
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let out = hydrant_complaints(
            &records,
            &populations,
            &hydrant_allowlist(),
            &["duplicate".to_string()],
            &window,
            &MonthFilter::warm_season(),
        )
        .unwrap();
        assert!(!out.values.contains_key("T0"));
        assert_eq!(out.values["T1"], 0.0); // zero-filled
        assert_eq!(out.skipped_units.len(), 1);
        assert_eq!(out.exclusions[0].reason, ExclusionReason::ZeroPopulation);
    }

    #[test]
    fn hydrant_rate_scales_inversely_with_population() {
        let records = vec![complaint(
            "1",
            date(2021, 6, 1),
            Some("T1"),
            "Hydrant Running (WC3)",
            "ok",
        )];
        let window = DateWindow::new(date(2021, 1, 1), date(2021, 12, 31)).unwrap();
        let rate_at = |pop: f64| {
            let populations = BTreeMap::from([("T1".to_string(), pop)]);
            hydrant_complaints(
                &records,
                &populations,
                &hydrant_allowlist(),
                &["duplicate".to_string()],
                &window,
                &MonthFilter::warm_season(),
            )
            .unwrap()
            .values["T1"]
        };
        assert_eq!(rate_at(1000.0), 2.0 * rate_at(2000.0));
    }

    #[test]
    fn impact_ranking_ties_share_percentile() {
        let values = BTreeMap::from([
            ("A".to_string(), 0.0),
            ("B".to_string(), 0.0),
            ("C".to_string(), 0.0),
            ("D".to_string(), 4.0),
        ]);
        let ranks = impact_ranking(&values).unwrap();
        assert_eq!(ranks["A"], 50.0);
        assert_eq!(ranks["A"], ranks["B"]);
        assert_eq!(ranks["B"], ranks["C"]);
        assert_eq!(ranks["D"], 100.0);
    }

    #[test]
    fn impact_ranking_single_unit_is_100() {
        let values = BTreeMap::from([("A".to_string(), 7.0)]);
        assert_eq!(impact_ranking(&values).unwrap()["A"], 100.0);
    }
}
