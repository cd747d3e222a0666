use alloc::vec::Vec;

use crate::error::{check_dims, Result};
use crate::learner::SpreadingModel;
use crate::matrix::Matrix;

const K1: f64 = 0.01;
const K2: f64 = 0.03;
const MIN_RANGE: f64 = 1e-12;

/// Divides each row by the sum of its absolute values; zero rows stay zero.
pub fn row_normalize(p: &Matrix) -> Matrix {
    let mut out = p.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let total: f64 = row.iter().map(|v| v.abs()).sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    out
}

/// Single-window structural similarity of two equally sized matrices,
/// clamped to `[0, 1]`.
///
/// The dynamic range is the largest entry over both inputs (at least 1e-12).
pub fn ssim(a: &Matrix, b: &Matrix) -> Result<f64> {
    check_dims("ssim rows", a.rows(), b.rows())?;
    check_dims("ssim cols", a.cols(), b.cols())?;
    let (xs, ys) = (a.as_slice(), b.as_slice());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return Ok(1.0);
    }
    let mu_x = xs.iter().sum::<f64>() / n;
    let mu_y = ys.iter().sum::<f64>() / n;
    let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mu_x, y - mu_y);
        var_x += dx * dx;
        var_y += dy * dy;
        cov += dx * dy;
    }
    var_x /= n;
    var_y /= n;
    cov /= n;

    let range = xs
        .iter()
        .chain(ys)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(MIN_RANGE);
    let c1 = (K1 * range) * (K1 * range);
    let c2 = (K2 * range) * (K2 * range);

    let value = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
    Ok(value.clamp(0.0, 1.0))
}

/// SSIM between the row-normalised matrices of each pair of consecutive models.
pub fn consecutive_ssim(models: &[SpreadingModel]) -> Result<Vec<f64>> {
    models
        .windows(2)
        .map(|pair| ssim(&row_normalize(&pair[0].p), &row_normalize(&pair[1].p)))
        .collect()
}
