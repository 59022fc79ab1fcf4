//! Impact record pipelines: power-outage intervals, emergency dispatch
//! records, and hydrant complaints become per-unit outcome columns, with
//! every excluded record logged and a conservation guarantee
//! (included + excluded == input).
//!
//! ```text
//! cargo run --example impact_pipelines
//! ```

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;

use indexprobe::impacts::{
    ems_heat_counts, hydrant_complaints, impact_ranking, outage_rate, ComplaintRecord,
    DateWindow, DispatchRecord, DistributionSystem, MonthFilter, OutageInterval,
};

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn main() -> indexprobe::Result<()> {
    let window = DateWindow::new(date(2023, 1, 1), date(2023, 12, 31))?;
    let months = MonthFilter::warm_season();

    // --- outages: daily max rate per locality, averaged over the season.
    // The radial row duplicates its network row above the 10-customer
    // threshold, so it is dropped; small duplicates are kept.
    let slot = |d: u32, h: u32, m: u32| date(2023, 7, d).and_hms_opt(h, m, 0).unwrap();
    let intervals = vec![
        OutageInterval::new("uptown", slot(1, 14, 0), DistributionSystem::Network, 120.0, 4000.0)?,
        OutageInterval::new("uptown", slot(1, 14, 0), DistributionSystem::Radial, 120.0, 4000.0)?,
        OutageInterval::new("uptown", slot(1, 14, 30), DistributionSystem::Network, 90.0, 4000.0)?,
        OutageInterval::new("uptown", slot(8, 9, 0), DistributionSystem::Network, 400.0, 4000.0)?,
        OutageInterval::new("riverside", slot(8, 9, 0), DistributionSystem::Network, 15.0, 1500.0)?,
    ];
    let outages = outage_rate(&intervals, &window, &months)?;
    println!("average daily max outage rate:");
    for (locality, rate) in &outages.values {
        println!("  {locality}: {rate:.6}");
    }
    println!(
        "  ({} records in, {} counted, {} excluded)",
        outages.input_count,
        outages.included_count,
        outages.exclusions.len()
    );
    for exclusion in &outages.exclusions {
        println!("  excluded {} ({})", exclusion.record_id, exclusion.reason);
    }

    // --- dispatches: count records whose final call type is HEAT; a
    // HEAT initial that was re-coded does not count, and records missing
    // a date or zipcode are logged out.
    let dispatch = |id: &str, d: Option<NaiveDate>, zip: Option<&str>, initial: &str, fin: &str| {
        DispatchRecord {
            incident_id: id.to_string(),
            date: d,
            zipcode: zip.map(str::to_string),
            initial_call_type: initial.to_string(),
            final_call_type: fin.to_string(),
        }
    };
    let dispatches = vec![
        dispatch("e1", Some(date(2023, 7, 2)), Some("11103"), "SICK", "HEAT"),
        dispatch("e2", Some(date(2023, 7, 3)), Some("11103"), "HEAT", "HEAT"),
        dispatch("e3", Some(date(2023, 7, 4)), Some("11104"), "HEAT", "INJURY"),
        dispatch("e4", None, Some("11104"), "SICK", "HEAT"),
        dispatch("e5", Some(date(2023, 7, 5)), None, "SICK", "HEAT"),
    ];
    let ems = ems_heat_counts(&dispatches, "HEAT", &window, &months)?;
    println!("heat dispatch counts per zipcode: {:?}", ems.values);
    for exclusion in &ems.exclusions {
        println!("  excluded {} ({})", exclusion.record_id, exclusion.reason);
    }

    // --- complaints: allowlisted descriptors per tract per 1,000
    // residents; duplicate resolutions and unknown tracts drop out, and
    // tracts without complaints still appear with rate 0.
    let complaint = |id: &str, d: NaiveDate, tract: Option<&str>, descriptor: &str, res: &str| {
        ComplaintRecord {
            complaint_id: id.to_string(),
            created_date: d,
            tract_id: tract.map(str::to_string),
            descriptor: descriptor.to_string(),
            resolution: res.to_string(),
        }
    };
    let complaints = vec![
        complaint("c1", date(2023, 6, 20), Some("36081001"), "Hydrant Running (WC3)", "Crew dispatched."),
        complaint("c2", date(2023, 6, 21), Some("36081001"), "Hydrant Running (WC3)", "Duplicate of a prior complaint."),
        complaint("c3", date(2023, 6, 22), Some("36081002"), "Request To Open A Hydrant (WC4)", "Resolved."),
        complaint("c4", date(2023, 6, 23), Some("36081001"), "Car Blocking Hydrant", "Resolved."),
    ];
    let populations = BTreeMap::from([
        ("36081001".to_string(), 4200.0),
        ("36081002".to_string(), 1300.0),
        ("36081003".to_string(), 2700.0),
    ]);
    let allowlist: BTreeSet<String> = [
        "Hydrant Running Full (WA4)",
        "Hydrant Running (WC3)",
        "Illegal Use Of A Hydrant (CIN)",
        "Request To Open A Hydrant (WC4)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let hydrants = hydrant_complaints(
        &complaints,
        &populations,
        &allowlist,
        &["Duplicate".to_string(), "duplicate".to_string()],
        &window,
        &months,
    )?;
    println!("hydrant complaints per 1,000 residents: {:?}", hydrants.values);
    for exclusion in &hydrants.exclusions {
        println!("  excluded {} ({})", exclusion.record_id, exclusion.reason);
    }

    // Outcome columns rank like any other attribute; ties (the zero-
    // complaint tracts, for instance) share an average-rank percentile.
    let percentiles = impact_ranking(&hydrants.values)?;
    println!("outcome percentiles: {percentiles:?}");

    assert!(outages.conserves_records());
    assert!(ems.conserves_records());
    assert!(hydrants.conserves_records());

    Ok(())
}
