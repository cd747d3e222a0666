//! Binary hotspot (`y`) and presence (`y_hat`) states.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::counts::WeeklyCaseCounts;
use crate::error::{check_dims, Error, Result};
use crate::matrix::BinaryMatrix;

/// Default hotspot threshold: three or more localities in a week.
pub const DEFAULT_THRESHOLD: u32 = 3;

/// Paired hotspot and presence states over regions x weeks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotspotSeries {
    pub subzone_ids: Vec<String>,
    pub week_labels: Vec<String>,
    /// `y[i][t] = 1` iff region `i` had at least `threshold` localities in week `t`.
    pub y: BinaryMatrix,
    /// `y_hat[i][t] = 1` iff region `i` had any locality in week `t`.
    pub y_hat: BinaryMatrix,
    pub threshold: u32,
}

impl HotspotSeries {
    pub fn new(
        subzone_ids: Vec<String>,
        week_labels: Vec<String>,
        y: BinaryMatrix,
        y_hat: BinaryMatrix,
        threshold: u32,
    ) -> Result<Self> {
        if threshold < 1 {
            return Err(Error::InvalidThreshold(threshold));
        }
        check_dims("hotspot rows", subzone_ids.len(), y.rows())?;
        check_dims("presence rows", subzone_ids.len(), y_hat.rows())?;
        check_dims("hotspot weeks", week_labels.len(), y.cols())?;
        check_dims("presence weeks", week_labels.len(), y_hat.cols())?;
        Ok(HotspotSeries {
            subzone_ids,
            week_labels,
            y,
            y_hat,
            threshold,
        })
    }

    pub fn regions(&self) -> usize {
        self.y.rows()
    }

    pub fn weeks(&self) -> usize {
        self.y.cols()
    }

    pub fn week_position(&self, label: &str) -> Option<usize> {
        self.week_labels.iter().position(|w| w == label)
    }

    /// Presence columns `from, from-1, ..., from-len+1` as 0/1 vectors.
    /// The caller checks the range.
    pub(crate) fn presence_window(&self, from: usize, len: usize) -> Vec<Vec<f64>> {
        (0..len).map(|h| self.y_hat.column_f64(from - h)).collect()
    }

    /// `true` when every hotspot is also a presence.
    pub fn is_consistent(&self) -> bool {
        (0..self.regions())
            .all(|i| (0..self.weeks()).all(|t| !self.y.get(i, t) || self.y_hat.get(i, t)))
    }

    /// Reorders regions so that new region `i` is old region `perm[i]`.
    pub fn permute_regions(&self, perm: &[usize]) -> Result<HotspotSeries> {
        Ok(HotspotSeries {
            subzone_ids: perm.iter().map(|&k| self.subzone_ids[k].clone()).collect(),
            week_labels: self.week_labels.clone(),
            y: self.y.permute_rows(perm)?,
            y_hat: self.y_hat.permute_rows(perm)?,
            threshold: self.threshold,
        })
    }
}

/// Thresholds weekly counts into hotspot and presence states.
pub fn binarize(counts: &WeeklyCaseCounts, threshold: u32) -> Result<HotspotSeries> {
    if threshold < 1 {
        return Err(Error::InvalidThreshold(threshold));
    }
    let (n, t) = (counts.regions(), counts.weeks());
    let y = BinaryMatrix::from_fn(n, t, |i, w| counts.get(i, w) >= threshold);
    let y_hat = BinaryMatrix::from_fn(n, t, |i, w| counts.get(i, w) >= 1);
    HotspotSeries::new(
        counts.subzone_ids.clone(),
        counts.week_labels.clone(),
        y,
        y_hat,
        threshold,
    )
}
