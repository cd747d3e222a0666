//! Forecast scoring per week and per year.
//!
//! Zero denominators score 0: precision with no predicted positives, recall
//! with no observed positives, and F1 when both are 0. Every metric is
//! therefore defined for every input.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::stats::{mean, median, population_std};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn merge(&self, other: &Confusion) -> Confusion {
        Confusion {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }
}

pub fn confusion_counts(predictions: &[bool], observations: &[bool]) -> Result<Confusion> {
    check_dims("predictions vs observations", observations.len(), predictions.len())?;
    let mut c = Confusion::default();
    for (&p, &o) in predictions.iter().zip(observations) {
        match (p, o) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(c: &Confusion) -> Metrics {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyScore {
    pub week: String,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

pub fn weekly_metrics(week: impl Into<String>, confusion: Confusion) -> WeeklyScore {
    WeeklyScore {
        week: week.into(),
        confusion,
        metrics: Metrics::from_confusion(&confusion),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Distribution> {
        if values.is_empty() {
            return None;
        }
        Some(Distribution {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            median: median(values),
            mean: mean(values),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearlySummary {
    pub year: String,
    pub weeks: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub precision_mean: f64,
    pub recall_mean: f64,
    pub f1_mean: f64,
    /// Metrics of the confusion counts pooled over all weeks.
    pub pooled: Metrics,
    /// Distribution of each temporal weight across weeks, `weight_stats[h-1]`.
    pub weight_stats: Vec<Distribution>,
}

/// Aggregates weekly scores (and the temporal weights learned for those
/// weeks) into means, population standard deviation and pooled metrics.
pub fn yearly_summary(
    year: impl Into<String>,
    scores: &[WeeklyScore],
    weights: &[Vec<f64>],
) -> Result<YearlySummary> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("weekly scores"));
    }
    let column = |f: fn(&Metrics) -> f64| -> Vec<f64> { scores.iter().map(|s| f(&s.metrics)).collect() };
    let accuracy = column(|m| m.accuracy);
    let pooled = scores
        .iter()
        .fold(Confusion::default(), |acc, s| acc.merge(&s.confusion));

    let lookback = weights.iter().map(Vec::len).max().unwrap_or(0);
    let weight_stats = (0..lookback)
        .filter_map(|h| {
            let vals: Vec<f64> = weights.iter().filter_map(|w| w.get(h).copied()).collect();
            Distribution::of(&vals)
        })
        .collect();

    Ok(YearlySummary {
        year: year.into(),
        weeks: scores.len(),
        accuracy_mean: mean(&accuracy),
        accuracy_std: population_std(&accuracy),
        precision_mean: mean(&column(|m| m.precision)),
        recall_mean: mean(&column(|m| m.recall)),
        f1_mean: mean(&column(|m| m.f1)),
        pooled: Metrics::from_confusion(&pooled),
        weight_stats,
    })
}
