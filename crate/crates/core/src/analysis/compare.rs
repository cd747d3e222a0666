use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::RegionMetrics;
use crate::stats::{pearson, spearman};

/// Correlations of one transmission vector against the mobility ratio.
/// `None` marks a correlation undefined because a vector is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub jaccard_top_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub top_k: usize,
    pub transmission_in: PairComparison,
    pub transmission_out: PairComparison,
    /// Labels of the top-k regions by mobility ratio.
    pub top_mobility: Vec<alloc::string::String>,
}

/// Indices of the `k` largest values, larger first; ties go to the lower index.
pub fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Jaccard index of the top-`k` sets of two vectors.
pub fn jaccard_top_k(a: &[f64], b: &[f64], k: usize) -> f64 {
    let sa: BTreeSet<usize> = top_k(a, k).into_iter().collect();
    let sb: BTreeSet<usize> = top_k(b, k).into_iter().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

fn pair(v: &[f64], mobility: &[f64], k: usize) -> PairComparison {
    PairComparison {
        pearson: pearson(v, mobility),
        spearman: spearman(v, mobility),
        jaccard_top_k: jaccard_top_k(v, mobility, k),
    }
}

pub fn compare_networks(metrics: &RegionMetrics, k: usize) -> ComparisonReport {
    let m = &metrics.mobility_ratio;
    ComparisonReport {
        top_k: k,
        transmission_in: pair(&metrics.transmission_in, m, k),
        transmission_out: pair(&metrics.transmission_out, m, k),
        top_mobility: top_k(m, k)
            .into_iter()
            .map(|i| metrics.labels[i].clone())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn metrics(tin: Vec<f64>, tout: Vec<f64>, mob: Vec<f64>) -> RegionMetrics {
        let n = mob.len();
        RegionMetrics {
            labels: (0..n).map(|i| alloc::format!("S{i}")).collect(),
            transmission_in: tin,
            transmission_out: tout,
            mobility_ratio: mob,
            population: vec![1.0; n],
        }
    }

    #[test]
    fn identical_vectors() {
        let v: Vec<f64> = (0..12).map(|i| f64::from(i) / 11.0).collect();
        let r = compare_networks(&metrics(v.clone(), v.clone(), v), 10);
        assert!((r.transmission_in.pearson.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.transmission_in.spearman.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.transmission_in.jaccard_top_k, 1.0);
        assert_eq!(r.top_mobility.len(), 10);
        assert_eq!(r.top_mobility[0], "S11");
    }

    #[test]
    fn reversed_ranking() {
        let v: Vec<f64> = (0..8).map(f64::from).collect();
        let rev: Vec<f64> = v.iter().rev().map(|x| x * x).collect();
        let r = compare_networks(&metrics(rev, v.clone(), v), 3);
        assert!((r.transmission_in.spearman.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(r.transmission_in.jaccard_top_k, 0.0);
    }

    #[test]
    fn constant_vector_reports_undefined() {
        let r = compare_networks(&metrics(vec![1.0; 4], vec![0.0, 1.0, 0.5, 0.2], vec![0.1, 0.2, 0.3, 1.0]), 2);
        assert_eq!(r.transmission_in.pearson, None);
        assert_eq!(r.transmission_in.spearman, None);
        assert!(r.transmission_out.pearson.is_some());
    }

    #[test]
    fn top_k_ties_prefer_low_index() {
        assert_eq!(top_k(&[1.0, 3.0, 3.0, 2.0], 2), vec![1, 2]);
        assert_eq!(top_k(&[1.0, 2.0], 5), vec![1, 0]);
    }
}
