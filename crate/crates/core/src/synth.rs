//! Synthetic hotspot worlds driven by a planted spreading matrix.
//!
//! The generator runs the same forward model the forecaster uses:
//! `y[t] = indicator(tanh(sum_h w*_h P* y_hat[t-h]))`, then optionally flips
//! hotspot bits and adds spurious presence, both at `noise_rate`. Output is a
//! [`HotspotSeries`] that can also be rendered as weekly counts so the full
//! pipeline runs unchanged on it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Days, NaiveDate};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counts::{week_label, WeeklyCaseCounts};
use crate::error::{Error, Result};
use crate::forecast::{activate, indicator_threshold};
use crate::hotspot::HotspotSeries;
use crate::learner::weighted_history;
use crate::matrix::{BinaryMatrix, Matrix};

/// First synthetic week (a Sunday).
pub const FIRST_WEEK: (i32, u32, u32) = (2013, 1, 6);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthScenario {
    pub regions: usize,
    pub weeks: usize,
    pub lookback: usize,
    /// Fraction of non-zero entries in a generated planted matrix.
    pub density: f64,
    /// Planted matrix; generated from `density` and `seed` when absent.
    pub p_star: Option<Matrix>,
    pub w_star: Vec<f64>,
    pub noise_rate: f64,
    /// Presence probability of each region in the seed weeks.
    pub seed_presence: f64,
    /// Hotspot threshold used when the series is rendered as counts.
    pub threshold: u32,
    pub seed: u64,
}

impl Default for SynthScenario {
    /// The reference scenario: 20 regions, 40 weeks, two weeks of lookback,
    /// 10% dense planted matrix, weights (0.8, 0.2), no noise.
    fn default() -> Self {
        SynthScenario {
            regions: 20,
            weeks: 40,
            lookback: 2,
            density: 0.1,
            p_star: None,
            w_star: alloc::vec![0.8, 0.2],
            noise_rate: 0.0,
            seed_presence: 0.25,
            threshold: 3,
            seed: 7,
        }
    }
}

impl SynthScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.regions < 1 || self.weeks < 1 || self.lookback < 1 {
            return bad("regions, weeks and lookback must all be at least 1".into());
        }
        if self.w_star.len() != self.lookback {
            return bad(format!(
                "w_star has {} entries for lookback {}",
                self.w_star.len(),
                self.lookback
            ));
        }
        if self.w_star.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return bad("w_star entries must lie in [0, 1]".into());
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return bad("noise_rate must lie in [0, 0.5)".into());
        }
        if !(0.0..=1.0).contains(&self.density) || !(0.0..=1.0).contains(&self.seed_presence) {
            return bad("density and seed_presence must lie in [0, 1]".into());
        }
        if let Some(p) = &self.p_star {
            if p.rows() != self.regions || p.cols() != self.regions {
                return bad(format!("p_star must be {0}x{0}", self.regions));
            }
            if p.as_slice().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return bad("p_star must be finite and non-negative".into());
            }
        }
        if self.threshold < 1 {
            return bad("threshold must be at least 1".into());
        }
        Ok(())
    }
}

/// Sparse non-negative planted matrix with `round(density * n^2)` non-zero
/// entries. Self-loops are placed first (weights in `[0.5, 1)`), the rest go
/// to random off-diagonal cells (weights in `[0.1, 0.5)`).
pub fn planted_matrix<R: Rng>(n: usize, density: f64, rng: &mut R) -> Matrix {
    let nonzero = libm::round(density * (n * n) as f64) as usize;
    let mut p = Matrix::zeros(n, n);
    let diagonal = nonzero.min(n);
    for i in 0..diagonal {
        p[(i, i)] = rng.random_range(0.5..1.0);
    }
    let off = nonzero - diagonal;
    let slots = n * n - n;
    if off > 0 && slots > 0 {
        for k in sample(rng, slots, off.min(slots)).into_iter() {
            let (i, r) = (k / (n - 1), k % (n - 1));
            let j = if r >= i { r + 1 } else { r };
            p[(i, j)] = rng.random_range(0.1..0.5);
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthWorld {
    pub series: HotspotSeries,
    pub p_star: Matrix,
    pub w_star: Vec<f64>,
    /// Fraction of zero entries in `p_star`.
    pub sparsity: f64,
}

pub fn synthetic_week_labels(weeks: usize) -> Vec<String> {
    let (y, m, d) = FIRST_WEEK;
    let first = NaiveDate::from_ymd_opt(y, m, d).expect("valid constant date");
    (0..weeks)
        .map(|k| week_label(first + Days::new(7 * k as u64)))
        .collect()
}

pub fn generate(scenario: &SynthScenario) -> Result<SynthWorld> {
    scenario.validate()?;
    let (n, t_len, h_len) = (scenario.regions, scenario.weeks, scenario.lookback);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let p_star = match &scenario.p_star {
        Some(p) => p.clone(),
        None => planted_matrix(n, scenario.density, &mut rng),
    };

    let mut y = BinaryMatrix::zeros(n, t_len);
    let mut y_hat = BinaryMatrix::zeros(n, t_len);
    for t in 0..t_len.min(h_len) {
        for i in 0..n {
            let present = rng.random_bool(scenario.seed_presence);
            y.set(i, t, present);
            y_hat.set(i, t, present);
        }
    }
    for t in h_len..t_len {
        let history: Vec<Vec<f64>> = (1..=h_len).map(|h| y_hat.column_f64(t - h)).collect();
        let z = weighted_history(&scenario.w_star, &history)?;
        let scores = activate(&p_star.mul_vec(&z)?);
        let (hot, _) = indicator_threshold(&scores);
        for (i, &is_hot) in hot.iter().enumerate() {
            // draw both variates every time so noise_rate = 0 keeps the stream aligned
            let flip = rng.random::<f64>() < scenario.noise_rate;
            let spurious = rng.random::<f64>() < scenario.noise_rate;
            let observed = is_hot != flip;
            y.set(i, t, observed);
            y_hat.set(i, t, observed || spurious);
        }
    }

    let ids = (0..n).map(|i| format!("SZ{i:03}")).collect();
    let series = HotspotSeries::new(ids, synthetic_week_labels(t_len), y, y_hat, scenario.threshold)?;
    let zeros = p_star.as_slice().iter().filter(|&&v| v == 0.0).count();
    Ok(SynthWorld {
        sparsity: zeros as f64 / (n * n) as f64,
        series,
        p_star,
        w_star: scenario.w_star.clone(),
    })
}

/// Renders a series as locality counts that binarize back to the same states:
/// `threshold` for hotspots, 1 for presence-only cells, 0 otherwise.
pub fn to_counts(series: &HotspotSeries) -> Result<WeeklyCaseCounts> {
    let (n, t) = (series.regions(), series.weeks());
    let mut counts = WeeklyCaseCounts::zeros(series.subzone_ids.clone(), series.week_labels.clone());
    for i in 0..n {
        for w in 0..t {
            let value = match (series.y.get(i, w), series.y_hat.get(i, w)) {
                (true, _) => series.threshold,
                (false, true) if series.threshold > 1 => 1,
                (false, true) => {
                    return Err(Error::InvalidScenario(
                        "presence without a hotspot cannot be encoded with threshold 1".into(),
                    ))
                }
                (false, false) => 0,
            };
            counts.set(i, w, value);
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hotspot::binarize;
    use alloc::vec;

    #[test]
    fn null_dynamics_die_out() {
        let scenario = SynthScenario {
            p_star: Some(Matrix::zeros(10, 10)),
            regions: 10,
            weeks: 12,
            ..SynthScenario::default()
        };
        let world = generate(&scenario).unwrap();
        for t in 2..12 {
            assert_eq!(world.series.y_hat.column_sum(t), 0);
        }
    }

    #[test]
    fn strong_self_loops_are_a_fixed_point() {
        let mut p = Matrix::identity(12);
        p.scale(20.0);
        let scenario = SynthScenario {
            regions: 12,
            weeks: 10,
            lookback: 2,
            p_star: Some(p),
            w_star: vec![1.0, 0.0],
            seed_presence: 0.3,
            seed: 3,
            ..SynthScenario::default()
        };
        let world = generate(&scenario).unwrap();
        let hot = world.series.y.column(1);
        assert!(hot.iter().any(|&b| b));
        for t in 2..10 {
            assert_eq!(world.series.y.column(t), hot);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let s = SynthScenario::default();
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = SynthScenario { seed: 8, ..s };
        assert_ne!(generate(&other).unwrap().p_star, generate(&SynthScenario::default()).unwrap().p_star);
    }

    #[test]
    fn planted_matrix_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = planted_matrix(20, 0.1, &mut rng);
        let nonzero = p.as_slice().iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, 40);
        assert!((0..20).all(|i| p[(i, i)] >= 0.5));
        let world = generate(&SynthScenario::default()).unwrap();
        assert!((world.sparsity - 0.9).abs() < 1e-12);
    }

    #[test]
    fn counts_round_trip_through_binarize() {
        let world = generate(&SynthScenario {
            noise_rate: 0.1,
            ..SynthScenario::default()
        })
        .unwrap();
        let counts = to_counts(&world.series).unwrap();
        let back = binarize(&counts, world.series.threshold).unwrap();
        assert_eq!(back, world.series);
    }

    #[test]
    fn invalid_scenarios() {
        let bad = SynthScenario {
            w_star: vec![0.5],
            ..SynthScenario::default()
        };
        assert!(matches!(generate(&bad), Err(Error::InvalidScenario(_))));
        let bad = SynthScenario {
            noise_rate: 0.5,
            ..SynthScenario::default()
        };
        assert!(generate(&bad).is_err());
    }
}
