use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use proptest::prelude::*;
use spreadnet_core::analysis::{build_mobility_network, row_normalize, rollup_planning_areas, FlowNetwork, Level, NetworkKind};
use spreadnet_core::counts::{build_weekly_counts, LocalityRecord, WeekRule};
use spreadnet_core::evaluation::{weekly_metrics, yearly_summary, Confusion};
use spreadnet_core::geometry::{assign_subzone, Point, Polygon, Subzone, SubzoneIndex};
use spreadnet_core::Matrix;

/// 3x2 grid of unit squares; ids sort in column-major order, areas by column.
fn grid() -> SubzoneIndex {
    let mut subzones = Vec::new();
    for x in 0..3 {
        for y in 0..2 {
            let (x0, y0) = (f64::from(x), f64::from(y));
            subzones.push(Subzone {
                id: format!("S{x}{y}"),
                planning_area: Some(format!("A{x}")),
                polygons: vec![Polygon::new(vec![
                    Point::new(x0, y0),
                    Point::new(x0 + 1.0, y0),
                    Point::new(x0 + 1.0, y0 + 1.0),
                    Point::new(x0, y0 + 1.0),
                ])],
                population: 100.0 * f64::from(x + y + 1),
                area_km2: 1.0,
            });
        }
    }
    SubzoneIndex::new(subzones).unwrap()
}

fn record_strategy() -> impl Strategy<Value = LocalityRecord> {
    (0u8..6, -0.5..3.5f64, -0.5..2.5f64, 0u64..60).prop_map(|(addr, lon, lat, day)| LocalityRecord {
        street_address: format!("addr {addr}"),
        latitude: lat,
        longitude: lon,
        cluster_number: 1,
        recent_cases: 1,
        total_cluster_cases: 1,
        collection_date: NaiveDate::from_ymd_opt(2013, 3, 1).unwrap() + chrono::Days::new(day),
    })
}

proptest! {
    #[test]
    fn counts_ignore_record_order(records in prop::collection::vec(record_strategy(), 1..40), seed in any::<u64>()) {
        let index = grid();
        let rule = WeekRule::default();
        let mut shuffled = records.clone();
        let n = shuffled.len();
        for k in 0..n {
            shuffled.swap(k, (seed.wrapping_mul(k as u64 + 7) % n as u64) as usize);
        }
        match (build_weekly_counts(&records, &index, rule), build_weekly_counts(&shuffled, &index, rule)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "outcome depends on order"),
        }
    }

    #[test]
    fn counts_total_equals_unique_triples(records in prop::collection::vec(record_strategy(), 1..40)) {
        let index = grid();
        let rule = WeekRule::default();
        let Ok(build) = build_weekly_counts(&records, &index, rule) else { return Ok(()) };

        // first record per (address, week) in address/date order decides the subzone
        let mut sorted = records.clone();
        sorted.sort_by(|a, b| {
            a.street_address.cmp(&b.street_address)
                .then(a.collection_date.cmp(&b.collection_date))
                .then(a.latitude.total_cmp(&b.latitude))
                .then(a.longitude.total_cmp(&b.longitude))
        });
        let mut first: BTreeMap<(String, NaiveDate), &LocalityRecord> = BTreeMap::new();
        for r in &sorted {
            first.entry((r.street_address.clone(), rule.week_start(r.collection_date))).or_insert(r);
        }
        let triples: BTreeSet<(String, NaiveDate, String)> = first
            .iter()
            .filter_map(|((addr, week), r)| {
                assign_subzone(r.longitude, r.latitude, &index).map(|id| (addr.clone(), *week, id.to_string()))
            })
            .collect();
        prop_assert_eq!(build.counts.total(), triples.len() as u64);
    }

    #[test]
    fn assignment_is_repeatable(lon in -0.5..3.5f64, lat in -0.5..2.5f64) {
        let index = grid();
        prop_assert_eq!(assign_subzone(lon, lat, &index), assign_subzone(lon, lat, &index));
    }

    #[test]
    fn yearly_summary_ignores_week_order(
        weeks in prop::collection::vec((0usize..20, 0usize..20, 0usize..20, 0usize..20), 1..12),
        rotate in any::<usize>(),
    ) {
        let scores: Vec<_> = weeks
            .iter()
            .enumerate()
            .map(|(k, &(tp, fp, tn, fn_))| weekly_metrics(format!("W{k}"), Confusion { tp, fp, tn, fn_ }))
            .collect();
        let weights: Vec<Vec<f64>> = (0..scores.len()).map(|k| vec![k as f64 / 20.0, 0.5]).collect();
        let mut s2 = scores.clone();
        let mut w2 = weights.clone();
        let r = rotate % scores.len();
        s2.rotate_left(r);
        w2.rotate_left(r);
        s2.reverse();
        w2.reverse();
        let a = yearly_summary("2013", &scores, &weights).unwrap();
        let b = yearly_summary("2013", &s2, &w2).unwrap();
        prop_assert_eq!(a.pooled, b.pooled);
        prop_assert_eq!(a.weeks, b.weeks);
        prop_assert_eq!(a.weight_stats.len(), b.weight_stats.len());
        for (x, y) in [
            (a.accuracy_mean, b.accuracy_mean),
            (a.accuracy_std, b.accuracy_std),
            (a.precision_mean, b.precision_mean),
            (a.recall_mean, b.recall_mean),
            (a.f1_mean, b.f1_mean),
        ] {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn row_normalize_is_idempotent(entries in prop::collection::vec(0.01..5.0f64, 25)) {
        let p = Matrix::from_vec(5, 5, entries).unwrap();
        let once = row_normalize(&p);
        let twice = row_normalize(&once);
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mobility_is_symmetric_with_twice_the_tuples(
        tuples in prop::collection::vec((0usize..8, 0usize..8), 0..100),
    ) {
        let index = grid();
        let ids = index.ids();
        // grids 0..5 map to subzones, 6 and 7 are unmapped
        let map: BTreeMap<String, String> = (0..6).map(|g| (format!("g{g}"), ids[g].clone())).collect();
        let commutes: Vec<(String, String)> = tuples.iter().map(|&(h, w)| (format!("g{h}"), format!("g{w}"))).collect();
        let kept = tuples.iter().filter(|&&(h, w)| h < 6 && w < 6).count();
        let result = build_mobility_network(&commutes, &map, &index);
        if kept == 0 {
            prop_assert_eq!(result, Err(spreadnet_core::Error::EmptyAfterMapping));
            return Ok(());
        }
        let built = result.unwrap();
        prop_assert_eq!(built.unmapped, tuples.len() - kept);
        prop_assert!(built.network.weights.is_symmetric());
        prop_assert_eq!(built.network.total_weight(), 2.0 * kept as f64);
    }

    #[test]
    fn rollup_keeps_total_weight(entries in prop::collection::vec(0u32..1000, 36)) {
        // multiples of 1/64 add exactly in any order
        let w = Matrix::from_vec(6, 6, entries.iter().map(|&v| f64::from(v) / 64.0).collect()).unwrap();
        let net = FlowNetwork::new(w, NetworkKind::Learned, Level::Subzone, grid().ids()).unwrap();
        let areas = rollup_planning_areas(&net, &grid()).unwrap();
        prop_assert_eq!(areas.len(), 3);
        prop_assert_eq!(areas.total_weight(), net.total_weight());
    }
}
