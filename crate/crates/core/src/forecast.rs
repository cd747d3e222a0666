//! One-week-ahead hotspot forecasts from a learned model.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::hotspot::HotspotSeries;
use crate::learner::{estimate, SpreadingModel};
use crate::stats::{mean, population_std};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    /// Activated estimates, one per region.
    pub scores: Vec<f64>,
    pub predictions: Vec<bool>,
    /// Mean plus population standard deviation of `scores`.
    pub threshold: f64,
    /// Week whose states fed the forecast; the forecast is for the week after.
    pub source_week: String,
    /// Label of the forecast week when the series extends that far.
    pub target_week: Option<String>,
}

/// Element-wise `tanh`.
pub fn activate(raw: &[f64]) -> Vec<f64> {
    raw.iter().map(|&x| libm::tanh(x)).collect()
}

/// Flags scores strictly above `mean + std` (population std over all scores).
pub fn indicator_threshold(scores: &[f64]) -> (Vec<bool>, f64) {
    let threshold = mean(scores) + population_std(scores);
    let predictions = scores.iter().map(|&s| s > threshold).collect();
    (predictions, threshold)
}

/// Forecasts week `current_week + 1` from presence in weeks
/// `current_week, ..., current_week - H + 1`.
pub fn forecast_next_week(
    model: &SpreadingModel,
    series: &HotspotSeries,
    current_week: usize,
) -> Result<ForecastResult> {
    let h = model.lookback();
    check_dims("model size vs regions", series.regions(), model.p.rows())?;
    if current_week >= series.weeks() {
        return Err(Error::dims("current week index", series.weeks(), current_week));
    }
    if current_week + 1 < h {
        return Err(Error::InsufficientHistory {
            week: current_week,
            needed: h,
            available: current_week + 1,
        });
    }
    let history = series.presence_window(current_week, h);
    let raw = estimate(&model.p, &model.weights, &history)?;
    let scores = activate(&raw);
    let (predictions, threshold) = indicator_threshold(&scores);
    Ok(ForecastResult {
        scores,
        predictions,
        threshold,
        source_week: series.week_labels[current_week].clone(),
        target_week: series.week_labels.get(current_week + 1).cloned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{BinaryMatrix, Matrix};
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn tanh_values() {
        assert_eq!(activate(&[0.0]), vec![0.0]);
        let big = activate(&[100.0])[0];
        assert!(big > 0.999 && big <= 1.0);
        // tanh(1) = (e^2 - 1) / (e^2 + 1), e^2 summed as a Taylor series
        let mut e2 = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            e2 += term;
            term *= 2.0 / f64::from(k);
        }
        let oracle = (e2 - 1.0) / (e2 + 1.0);
        assert!((oracle - 0.7615941559557649).abs() < 1e-15);
        assert!((activate(&[1.0])[0] - oracle).abs() < 1e-12);
    }

    #[test]
    fn equal_scores_predict_nothing() {
        let (pred, t) = indicator_threshold(&[0.4; 5]);
        assert!((t - 0.4).abs() < 1e-15);
        assert!(pred.iter().all(|&p| !p));
        let (pred, _) = indicator_threshold(&[0.7]);
        assert_eq!(pred, [false]);
    }

    #[test]
    fn hand_threshold() {
        let (pred, t) = indicator_threshold(&[0.0, 0.0, 0.0, 1.0]);
        // mean 0.25, population std sqrt(0.1875)
        let expect = 0.25 + libm::sqrt(0.1875);
        assert!((t - expect).abs() < 1e-15);
        assert!((t - 0.683).abs() < 1e-3);
        assert_eq!(pred, [false, false, false, true]);
        // sample std would give 0.25 + 0.5 = 0.75
        assert!((t - 0.75).abs() > 0.05);
    }

    fn series(n: usize, t: usize) -> HotspotSeries {
        let ids = (0..n).map(|i| alloc::format!("S{i}")).collect();
        let weeks = (0..t).map(|k| k.to_string()).collect();
        let y = BinaryMatrix::from_fn(n, t, |i, w| (i * 7 + w) % 4 == 0);
        HotspotSeries::new(ids, weeks, y.clone(), y, 3).unwrap()
    }

    #[test]
    fn null_model_predicts_nothing() {
        let s = series(6, 5);
        let model = SpreadingModel {
            p: Matrix::zeros(6, 6),
            weights: vec![0.5, 0.5],
            target_week: "3".into(),
            final_loss: 0.0,
            iterations_used: 0,
        };
        let f = forecast_next_week(&model, &s, 3).unwrap();
        assert!(f.scores.iter().all(|&v| v == 0.0));
        assert!(f.predictions.iter().all(|&p| !p));
        assert_eq!(f.target_week.as_deref(), Some("4"));
        let last = forecast_next_week(&model, &s, 4).unwrap();
        assert_eq!(last.target_week, None);
    }

    #[test]
    fn forecast_window_uses_current_week() {
        // only region 2 present in the current week, identity spreading
        let ids = (0..4).map(|i| alloc::format!("S{i}")).collect();
        let weeks = (0..3).map(|k| k.to_string()).collect();
        let y_hat = BinaryMatrix::from_fn(4, 3, |i, w| (w == 2 && i == 2) || (w < 2 && i == 0));
        let s = HotspotSeries::new(ids, weeks, y_hat.clone(), y_hat, 1).unwrap();
        let model = SpreadingModel {
            p: Matrix::identity(4),
            weights: vec![1.0],
            target_week: "1".into(),
            final_loss: 0.0,
            iterations_used: 0,
        };
        let f = forecast_next_week(&model, &s, 2).unwrap();
        assert_eq!(f.predictions, [false, false, true, false]);
    }

    #[test]
    fn too_early_is_rejected() {
        let s = series(3, 5);
        let model = SpreadingModel {
            p: Matrix::zeros(3, 3),
            weights: vec![0.5; 4],
            target_week: "0".into(),
            final_loss: 0.0,
            iterations_used: 0,
        };
        assert!(matches!(
            forecast_next_week(&model, &s, 2),
            Err(Error::InsufficientHistory { .. })
        ));
        assert!(forecast_next_week(&model, &s, 3).is_ok());
    }
}
