//! Learning the weekly spreading matrix and temporal weights.
//!
//! For a target week `t` the model estimates the hotspot state as
//! `sum_h w_h * P * y_hat[t-h]` over the `H` preceding presence columns and
//! fits `P` by minimising
//!
//! ```text
//! sum_i (sum_h w_h * P[i,:] . y_hat[t-h] - y[i,t])^2 + lambda1 * |P|_2^2 + lambda2 * |P|_1
//! ```
//!
//! row by row with subgradient descent. The temporal weights are chosen by a
//! coarse-then-fine coordinate grid search, refitting `P` for each candidate.
//!
//! History slices are always ordered most recent first: `history[0]` is the
//! week just before the target, `history[H-1]` is `H` weeks back.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::hotspot::HotspotSeries;
use crate::matrix::{dot, Matrix};

/// Upper bound of the uniform noise used to initialise `P`.
pub const INIT_SCALE: f64 = 0.01;

/// Step sizes below this stop the descent.
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    /// Number of preceding weeks feeding each estimate (`H`).
    pub lookback: usize,
    /// L2 coefficient.
    pub lambda1: f64,
    /// L1 coefficient.
    pub lambda2: f64,
    /// Initial step size; halved whenever a step would raise the loss.
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the relative loss decrease of an iteration drops below this.
    pub tolerance: f64,
    /// Coarse grid increment for the temporal weight search.
    pub coarse_step: f64,
    /// Refinement grid increment, swept within one coarse step of the coarse optimum.
    pub refine_step: f64,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            lookback: 4,
            lambda1: 0.01,
            lambda2: 0.1,
            learning_rate: 0.01,
            max_iters: 500,
            tolerance: 1e-6,
            coarse_step: 0.1,
            refine_step: 0.01,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.lookback < 1 {
            return bad("lookback must be at least 1");
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return bad("regularization coefficients must be non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        for step in [self.coarse_step, self.refine_step] {
            if !(step > 0.0 && step <= 1.0) {
                return bad("weight grid steps must lie in (0, 1]");
            }
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        Ok(())
    }
}

/// Learned parameters for one target week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingModel {
    /// `p[(i, j)]` weighs the spreading link from region `j` to region `i`.
    pub p: Matrix,
    /// Temporal weights, `weights[h-1]` for the week `h` back.
    pub weights: Vec<f64>,
    pub target_week: String,
    pub final_loss: f64,
    pub iterations_used: usize,
}

impl SpreadingModel {
    pub fn lookback(&self) -> usize {
        self.weights.len()
    }
}

fn check_history(n: usize, weights: &[f64], history: &[Vec<f64>]) -> Result<()> {
    check_dims("history length vs weights", weights.len(), history.len())?;
    for col in history {
        check_dims("history column length", n, col.len())?;
    }
    Ok(())
}

/// `sum_h w_h * history[h]`.
pub fn weighted_history(weights: &[f64], history: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = history.first().map_or(0, Vec::len);
    check_history(n, weights, history)?;
    let mut z = vec![0.0; n];
    for (w, col) in weights.iter().zip(history) {
        for (zi, yi) in z.iter_mut().zip(col) {
            *zi += w * yi;
        }
    }
    Ok(z)
}

/// Hotspot estimate `sum_h w_h * P * history[h]`.
pub fn estimate(p: &Matrix, weights: &[f64], history: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_history(p.cols(), weights, history)?;
    let z = weighted_history(weights, history)?;
    p.mul_vec(&z)
}

/// Regularised squared loss of `p` against the target column.
pub fn loss(
    p: &Matrix,
    weights: &[f64],
    history: &[Vec<f64>],
    target: &[f64],
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    check_history(p.cols(), weights, history)?;
    check_dims("target length", p.rows(), target.len())?;
    let z = weighted_history(weights, history)?;
    Ok(loss_with_combined(p, &z, target, lambda1, lambda2))
}

fn loss_with_combined(p: &Matrix, z: &[f64], target: &[f64], lambda1: f64, lambda2: f64) -> f64 {
    let data: f64 = p
        .iter_rows()
        .zip(target)
        .map(|(row, y)| {
            let r = dot(row, z) - y;
            r * r
        })
        .sum();
    data + lambda1 * p.squared_norm() + lambda2 * p.l1_norm()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gradient of the row-`i` loss with respect to `P[i,:]`:
/// `2 r z + 2 lambda1 P[i,:] + lambda2 sign(P[i,:])`, where `z` is the
/// weighted history and `r = P[i,:] . z - y_i`. `sign(0) = 0`.
pub fn row_gradient(
    p_row: &[f64],
    weights: &[f64],
    history: &[Vec<f64>],
    target_i: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<Vec<f64>> {
    check_history(p_row.len(), weights, history)?;
    let z = weighted_history(weights, history)?;
    let mut g = vec![0.0; p_row.len()];
    row_gradient_into(p_row, &z, target_i, lambda1, lambda2, &mut g);
    Ok(g)
}

fn row_gradient_into(p_row: &[f64], z: &[f64], target_i: f64, lambda1: f64, lambda2: f64, out: &mut [f64]) {
    let r2 = 2.0 * (dot(p_row, z) - target_i);
    for ((g, &p), &zj) in out.iter_mut().zip(p_row).zip(z) {
        *g = r2 * zj + 2.0 * lambda1 * p + lambda2 * sign(p);
    }
}

/// Seeded `uniform(0, INIT_SCALE)` starting matrix, filled row-major.
pub fn initial_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * n).map(|_| rng.random::<f64>() * INIT_SCALE).collect();
    Matrix::from_vec(n, n, data).expect("n*n entries")
}

/// Outcome of a descent run, including the accepted loss after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub p: Matrix,
    /// Loss before the first step followed by the loss after each accepted step.
    pub loss_trace: Vec<f64>,
    pub iterations: usize,
    /// Step size in effect when the descent stopped.
    pub final_step: f64,
}

impl Descent {
    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("trace starts with the initial loss")
    }
}

/// Row-wise subgradient descent from `init`.
///
/// Every iteration computes all row gradients at the current iterate, then
/// moves `P <- P - step * G`. A step that would raise the loss is rejected and
/// the step size halved, so the recorded loss never increases.
pub fn descend(
    init: Matrix,
    weights: &[f64],
    history: &[Vec<f64>],
    target: &[f64],
    config: &LearnerConfig,
) -> Result<Descent> {
    config.validate()?;
    if !init.is_square() {
        return Err(Error::dims("square spreading matrix", init.rows(), init.cols()));
    }
    check_history(init.cols(), weights, history)?;
    check_dims("target length", init.rows(), target.len())?;
    let z = weighted_history(weights, history)?;
    let (l1, l2) = (config.lambda1, config.lambda2);

    let n = init.rows();
    let mut p = init;
    let mut current = loss_with_combined(&p, &z, target, l1, l2);
    let mut trace = vec![current];
    let mut step = config.learning_rate;
    let mut grad = Matrix::zeros(n, n);
    let mut candidate = p.clone();
    let mut iterations = 0;

    while iterations < config.max_iters {
        for (i, &y) in target.iter().enumerate() {
            row_gradient_into(p.row(i), &z, y, l1, l2, grad.row_mut(i));
        }
        let accepted = loop {
            for ((c, &v), &g) in candidate
                .as_mut_slice()
                .iter_mut()
                .zip(p.as_slice())
                .zip(grad.as_slice())
            {
                *c = v - step * g;
            }
            let next = loss_with_combined(&candidate, &z, target, l1, l2);
            if next <= current {
                break Some(next);
            }
            step /= 2.0;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some(next) = accepted else { break };
        iterations += 1;
        core::mem::swap(&mut p, &mut candidate);
        let previous = current;
        current = next;
        trace.push(current);
        let rel = if previous > 0.0 {
            (previous - current) / previous
        } else {
            0.0
        };
        if rel < config.tolerance {
            break;
        }
    }

    Ok(Descent {
        p,
        loss_trace: trace,
        iterations,
        final_step: step,
    })
}

fn check_target_week(series: &HotspotSeries, target_week: usize, lookback: usize) -> Result<()> {
    if target_week >= series.weeks() {
        return Err(Error::dims("target week index", series.weeks(), target_week));
    }
    if target_week < lookback {
        return Err(Error::InsufficientHistory {
            week: target_week,
            needed: lookback,
            available: target_week,
        });
    }
    Ok(())
}

/// Presence history `y_hat[t-1], ..., y_hat[t-H]` and hotspot target `y[t]`.
pub fn training_window(
    series: &HotspotSeries,
    target_week: usize,
    lookback: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_target_week(series, target_week, lookback)?;
    Ok((
        series.presence_window(target_week - 1, lookback),
        series.y.column_f64(target_week),
    ))
}

/// Fits `P` for a fixed set of temporal weights.
pub fn fit_spreading_matrix(
    series: &HotspotSeries,
    target_week: usize,
    weights: &[f64],
    config: &LearnerConfig,
) -> Result<SpreadingModel> {
    let init = initial_matrix(series.regions(), config.seed);
    fit_spreading_matrix_from(series, target_week, weights, init, config)
}

/// As [`fit_spreading_matrix`] but starting from a caller-supplied matrix.
pub fn fit_spreading_matrix_from(
    series: &HotspotSeries,
    target_week: usize,
    weights: &[f64],
    init: Matrix,
    config: &LearnerConfig,
) -> Result<SpreadingModel> {
    config.validate()?;
    check_dims("temporal weights", config.lookback, weights.len())?;
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::InvalidConfig("temporal weights must lie in [0, 1]".into()));
    }
    let (history, target) = training_window(series, target_week, config.lookback)?;
    let descent = descend(init, weights, &history, &target, config)?;
    Ok(SpreadingModel {
        final_loss: descent.final_loss(),
        iterations_used: descent.iterations,
        p: descent.p,
        weights: weights.to_vec(),
        target_week: series.week_labels[target_week].clone(),
    })
}

fn round_grid(v: f64) -> f64 {
    libm::round(v * 1e12) / 1e12
}

/// Grid `{0, step, 2 step, ...}` within `[lo, hi]`, always including both ends.
pub fn weight_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = round_grid(lo + f64::from(k) * step);
        if v >= hi - 1e-9 {
            break;
        }
        out.push(v);
        k += 1;
    }
    out.push(round_grid(hi));
    out
}

/// Initial temporal weights for the coordinate search.
pub const SEARCH_START_WEIGHT: f64 = 0.5;

/// Chooses temporal weights by coordinate grid search and returns the best
/// fitted model.
///
/// Starting from every weight at [`SEARCH_START_WEIGHT`], each coordinate in
/// turn is swept over the coarse grid with the others held fixed, refitting
/// `P` per candidate and keeping the lowest final loss (ties keep the earlier
/// candidate). A second pass sweeps each coordinate on the refinement grid
/// within one coarse step of its coarse optimum.
pub fn search_temporal_weights(
    series: &HotspotSeries,
    target_week: usize,
    config: &LearnerConfig,
) -> Result<SpreadingModel> {
    config.validate()?;
    check_target_week(series, target_week, config.lookback)?;
    let init = initial_matrix(series.regions(), config.seed);

    // A weight vector already evaluated lost to (or is) the incumbent, and the
    // incumbent only improves, so it never needs refitting.
    let key = |w: &[f64]| -> Vec<i64> { w.iter().map(|v| libm::round(v * 1e9) as i64).collect() };
    let mut tried: BTreeSet<Vec<i64>> = BTreeSet::new();

    let mut weights = vec![SEARCH_START_WEIGHT; config.lookback];
    tried.insert(key(&weights));
    let mut best = fit_spreading_matrix_from(series, target_week, &weights, init.clone(), config)?;

    let passes: [(f64, bool); 2] = [(config.coarse_step, false), (config.refine_step, true)];
    for (step, local) in passes {
        for h in 0..config.lookback {
            let centre = weights[h];
            let candidates = if local {
                weight_grid(
                    (centre - config.coarse_step).max(0.0),
                    (centre + config.coarse_step).min(1.0),
                    step,
                )
            } else {
                weight_grid(0.0, 1.0, step)
            };
            for v in candidates {
                let mut trial = weights.clone();
                trial[h] = v;
                if !tried.insert(key(&trial)) {
                    continue;
                }
                let model = fit_spreading_matrix_from(series, target_week, &trial, init.clone(), config)?;
                if model.final_loss < best.final_loss {
                    best = model;
                    weights = trial;
                }
            }
        }
    }
    Ok(best)
}
