use proptest::prelude::*;
use spreadnet_core::evaluation::{confusion_counts, weekly_metrics, Metrics};
use spreadnet_core::forecast::{activate, forecast_next_week, indicator_threshold};
use spreadnet_core::hotspot::HotspotSeries;
use spreadnet_core::learner::{search_temporal_weights, LearnerConfig, SpreadingModel};
use spreadnet_core::stats::median;
use spreadnet_core::synth::{generate, SynthScenario};
use spreadnet_core::{BinaryMatrix, Matrix};

fn model(p: Matrix, weights: Vec<f64>) -> SpreadingModel {
    SpreadingModel {
        p,
        weights,
        target_week: "w".into(),
        final_loss: 0.0,
        iterations_used: 0,
    }
}

#[test]
fn region_driven_alone_is_the_only_forecast() {
    let n = 9;
    let k = 4;
    let mut p = Matrix::zeros(n, n);
    for j in 0..n {
        p[(k, j)] = 5.0;
    }
    let scenario = SynthScenario {
        regions: n,
        weeks: 8,
        lookback: 2,
        p_star: Some(p.clone()),
        w_star: vec![0.8, 0.2],
        seed_presence: 0.5,
        seed: 2,
        ..SynthScenario::default()
    };
    let world = generate(&scenario).unwrap();
    let mut e_k = vec![false; n];
    e_k[k] = true;
    for t in 2..8 {
        assert_eq!(world.series.y.column(t), e_k, "week {t}");
    }
    let f = forecast_next_week(&model(p, vec![0.8, 0.2]), &world.series, 6).unwrap();
    assert_eq!(f.predictions, e_k);
    assert_eq!(f.target_week.as_deref(), Some(world.series.week_labels[7].as_str()));
}

fn series_from(bits: &[bool], n: usize, t: usize) -> HotspotSeries {
    let y = BinaryMatrix::from_fn(n, t, |i, w| bits[i * t + w]);
    HotspotSeries::new(
        (0..n).map(|i| format!("R{i}")).collect(),
        (0..t).map(|w| format!("W{w:02}")).collect(),
        y.clone(),
        y,
        3,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn predictions_follow_region_permutation(
        n in 2usize..8,
        entries in prop::collection::vec(0.0..2.0f64, 64),
        bits in prop::collection::vec(any::<bool>(), 24),
        seed in any::<u64>(),
    ) {
        let t = 3;
        let p = Matrix::from_vec(n, n, entries[..n * n].to_vec()).unwrap();
        let series = series_from(&bits, n, t);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed % n as u64) as usize);
        perm.swap(0, n - 1);

        let base = forecast_next_week(&model(p.clone(), vec![0.6, 0.4]), &series, 2).unwrap();
        let moved = forecast_next_week(
            &model(p.permuted(&perm).unwrap(), vec![0.6, 0.4]),
            &series.permute_regions(&perm).unwrap(),
            2,
        )
        .unwrap();
        let expected: Vec<bool> = perm.iter().map(|&i| base.predictions[i]).collect();
        prop_assert_eq!(moved.predictions, expected);
    }

    #[test]
    fn raising_a_score_keeps_its_positive_prediction(
        raw in prop::collection::vec(-3.0..3.0f64, 2..20),
        pick in any::<prop::sample::Index>(),
        bump in 0.0..5.0f64,
    ) {
        let i = pick.index(raw.len());
        let others: Vec<f64> = activate(&raw).into_iter().enumerate().filter(|&(k, _)| k != i).map(|(_, s)| s).collect();
        let (_, threshold) = indicator_threshold(&others);
        let before = activate(&[raw[i]])[0];
        let after = activate(&[raw[i] + bump])[0];
        prop_assert!(after >= before);
        if before > threshold {
            prop_assert!(after > threshold);
        }
    }

    #[test]
    fn metrics_are_total_and_bounded(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 0..60)) {
        let (pred, obs): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let c = confusion_counts(&pred, &obs).unwrap();
        let m: Metrics = weekly_metrics("w", c).metrics;
        for v in [m.accuracy, m.precision, m.recall, m.f1] {
            prop_assert!(v.is_finite() && (0.0..=1.0).contains(&v));
        }
        if c.tp == 0 {
            prop_assert_eq!(m.f1, 0.0);
        }
    }
}

fn held_out_f1(noise_rate: f64, seed: u64) -> f64 {
    let world = generate(&SynthScenario {
        noise_rate,
        seed,
        ..SynthScenario::default()
    })
    .unwrap();
    let series = &world.series;
    let cfg = LearnerConfig {
        lookback: 2,
        ..LearnerConfig::default()
    };
    let last = series.weeks() - 1;
    let mut total = spreadnet_core::evaluation::Confusion::default();
    for t in last - 5..last {
        let m = search_temporal_weights(series, t, &cfg).unwrap();
        let f = forecast_next_week(&m, series, t).unwrap();
        total = total.merge(&confusion_counts(&f.predictions, &series.y.column(t + 1)).unwrap());
    }
    Metrics::from_confusion(&total).f1
}

#[test]
fn more_noise_does_not_help() {
    let medians: Vec<f64> = [0.0, 0.05, 0.2]
        .iter()
        .map(|&rate| median(&(1..=5).map(|s| held_out_f1(rate, s)).collect::<Vec<_>>()))
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}
