use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::geometry::SubzoneIndex;
use crate::learner::SpreadingModel;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    Learned,
    Mobility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Subzone,
    PlanningArea,
}

/// Weighted directed region x region graph. `weights[(i, j)]` is the flow
/// into `labels[i]` from `labels[j]` for learned networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub weights: Matrix,
    pub kind: NetworkKind,
    pub level: Level,
    pub labels: Vec<String>,
}

impl FlowNetwork {
    pub fn new(weights: Matrix, kind: NetworkKind, level: Level, labels: Vec<String>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::dims("square network", weights.rows(), weights.cols()));
        }
        check_dims("network labels", weights.rows(), labels.len())?;
        Ok(FlowNetwork {
            weights,
            kind,
            level,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearlyAggregate {
    pub network: FlowNetwork,
    /// Target weeks whose matrix had no positive entry and contributed nothing.
    pub zero_weeks: Vec<String>,
}

/// Sums the weekly matrices of one year after scaling each so its largest
/// entry is 1.
///
/// Only the positive part of each weekly matrix enters the sum: subgradient
/// descent leaves tiny negative entries around zero and network weights are
/// non-negative.
pub fn aggregate_yearly(models: &[SpreadingModel], labels: Vec<String>) -> Result<YearlyAggregate> {
    let first = models.first().ok_or(Error::EmptyInput("models for yearly aggregation"))?;
    let n = first.p.rows();
    check_dims("network labels", n, labels.len())?;
    let mut total = Matrix::zeros(n, n);
    let mut zero_weeks = Vec::new();
    for model in models {
        check_dims("weekly matrix size", n, model.p.rows())?;
        check_dims("weekly matrix size", n, model.p.cols())?;
        let peak = model.p.as_slice().iter().copied().fold(0.0, f64::max);
        if !(peak > 0.0) {
            zero_weeks.push(model.target_week.clone());
            continue;
        }
        for (acc, &v) in total.as_mut_slice().iter_mut().zip(model.p.as_slice()) {
            *acc += v.max(0.0) / peak;
        }
    }
    Ok(YearlyAggregate {
        network: FlowNetwork::new(total, NetworkKind::Learned, Level::Subzone, labels)?,
        zero_weeks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityBuild {
    pub network: FlowNetwork,
    /// Tuples dropped because a grid had no subzone (or an unknown one).
    pub unmapped: usize,
}

/// Symmetric commuting network: every `(home, work)` tuple adds one to both
/// `(home, work)` and `(work, home)`, so within-subzone commutes add two to
/// the diagonal.
pub fn build_mobility_network<S: AsRef<str>>(
    commutes: &[(S, S)],
    grid_to_subzone: &BTreeMap<String, String>,
    index: &SubzoneIndex,
) -> Result<MobilityBuild> {
    let n = index.len();
    let positions: BTreeMap<&str, usize> = index
        .subzones()
        .iter()
        .enumerate()
        .map(|(k, s)| (s.id.as_str(), k))
        .collect();
    let resolve = |grid: &str| -> Option<usize> {
        grid_to_subzone
            .get(grid)
            .and_then(|sz| positions.get(sz.as_str()).copied())
    };
    let mut weights = Matrix::zeros(n, n);
    let mut unmapped = 0;
    let mut mapped = 0;
    for (home, work) in commutes {
        match (resolve(home.as_ref()), resolve(work.as_ref())) {
            (Some(i), Some(j)) => {
                weights[(i, j)] += 1.0;
                weights[(j, i)] += 1.0;
                mapped += 1;
            }
            _ => unmapped += 1,
        }
    }
    if mapped == 0 {
        return Err(Error::EmptyAfterMapping);
    }
    Ok(MobilityBuild {
        network: FlowNetwork::new(weights, NetworkKind::Mobility, Level::Subzone, index.ids())?,
        unmapped,
    })
}

/// Per-region comparison vectors, each scaled so its maximum is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMetrics {
    pub labels: Vec<String>,
    /// Row sums of the learned network: spreading into each region.
    pub transmission_in: Vec<f64>,
    /// Column sums of the learned network: spreading out of each region.
    pub transmission_out: Vec<f64>,
    /// Commuting volume times population (or density).
    pub mobility_ratio: Vec<f64>,
    pub population: Vec<f64>,
}

fn normalize_by_max(mut v: Vec<f64>) -> Vec<f64> {
    let peak = v.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        v.iter_mut().for_each(|x| *x /= peak);
    }
    v
}

/// Transmission-in/out from the learned network and mobility ratio from the
/// commuting network, all with self-flows removed.
pub fn region_metrics(
    learned: &FlowNetwork,
    mobility: &FlowNetwork,
    population: &[f64],
) -> Result<RegionMetrics> {
    let n = learned.len();
    check_dims("mobility network size", n, mobility.len())?;
    check_dims("population length", n, population.len())?;
    if learned.labels != mobility.labels {
        return Err(Error::LabelMismatch);
    }
    let mut gl = learned.weights.clone();
    gl.zero_diagonal();
    let mut gm = mobility.weights.clone();
    gm.zero_diagonal();

    let mut inflow = vec![0.0; n];
    let mut outflow = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            inflow[i] += gl[(i, j)];
            outflow[j] += gl[(i, j)];
        }
    }
    let mobility_ratio = gm
        .iter_rows()
        .zip(population)
        .map(|(row, d)| row.iter().sum::<f64>() * d)
        .collect();

    Ok(RegionMetrics {
        labels: learned.labels.clone(),
        transmission_in: normalize_by_max(inflow),
        transmission_out: normalize_by_max(outflow),
        mobility_ratio: normalize_by_max(mobility_ratio),
        population: population.to_vec(),
    })
}

/// Sums subzone flows into planning-area flows. Areas are ordered by id.
pub fn rollup_planning_areas(net: &FlowNetwork, index: &SubzoneIndex) -> Result<FlowNetwork> {
    let mut area_of = Vec::with_capacity(net.len());
    for label in &net.labels {
        let k = index
            .position(label)
            .ok_or_else(|| Error::UnknownRegion(label.clone()))?;
        let area = index.subzones()[k]
            .planning_area
            .as_deref()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::MissingPlanningArea(label.clone()))?;
        area_of.push(area);
    }
    let areas: Vec<String> = area_of
        .iter()
        .copied()
        .collect::<BTreeSet<&str>>()
        .into_iter()
        .map(String::from)
        .collect();
    let slot: Vec<usize> = area_of
        .iter()
        .map(|a| areas.iter().position(|x| x == a).expect("collected above"))
        .collect();

    let m = areas.len();
    let mut weights = Matrix::zeros(m, m);
    for i in 0..net.len() {
        for j in 0..net.len() {
            weights[(slot[i], slot[j])] += net.weights[(i, j)];
        }
    }
    FlowNetwork::new(weights, net.kind, Level::PlanningArea, areas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Polygon, Subzone};
    use alloc::string::ToString;

    fn model(p: Matrix, week: &str) -> SpreadingModel {
        SpreadingModel {
            p,
            weights: vec![1.0],
            target_week: week.to_string(),
            final_loss: 0.0,
            iterations_used: 0,
        }
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("S{i}")).collect()
    }

    fn index(areas: &[&str]) -> SubzoneIndex {
        let subzones = areas
            .iter()
            .enumerate()
            .map(|(i, a)| Subzone {
                id: alloc::format!("S{i}"),
                planning_area: Some(a.to_string()),
                polygons: vec![Polygon::new(vec![
                    Point::new(i as f64, 0.0),
                    Point::new(i as f64 + 1.0, 0.0),
                    Point::new(i as f64 + 1.0, 1.0),
                    Point::new(i as f64, 1.0),
                ])],
                population: 100.0,
                area_km2: 1.0,
            })
            .collect();
        SubzoneIndex::new(subzones).unwrap()
    }

    #[test]
    fn single_week_scaled_to_unit_max() {
        let mut p = Matrix::zeros(4, 4);
        p[(2, 3)] = 5.0;
        p[(0, 1)] = 2.5;
        let agg = aggregate_yearly(&[model(p, "w")], labels(4)).unwrap();
        assert_eq!(agg.network.weights[(2, 3)], 1.0);
        assert_eq!(agg.network.weights[(0, 1)], 0.5);
        assert!(agg.network.weights.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn aggregation_is_additive() {
        let p = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let one = aggregate_yearly(&[model(p.clone(), "a")], labels(2)).unwrap();
        let two = aggregate_yearly(&[model(p.clone(), "a"), model(p, "b")], labels(2)).unwrap();
        let mut doubled = one.network.weights.clone();
        doubled.scale(2.0);
        assert_eq!(two.network.weights, doubled);
    }

    #[test]
    fn zero_week_is_reported() {
        let agg = aggregate_yearly(&[model(Matrix::zeros(2, 2), "quiet")], labels(2)).unwrap();
        assert_eq!(agg.zero_weeks, ["quiet"]);
        assert!(aggregate_yearly(&[], labels(2)).is_err());
    }

    #[test]
    fn mobility_single_edge_and_diagonal() {
        let idx = index(&["A", "A", "B"]);
        let grids: BTreeMap<String, String> = [("g0", "S0"), ("g1", "S1"), ("g2", "S2")]
            .iter()
            .map(|(g, s)| (g.to_string(), s.to_string()))
            .collect();
        let built = build_mobility_network(&[("g1", "g2"), ("g0", "g0"), ("g9", "g0")], &grids, &idx).unwrap();
        let w = &built.network.weights;
        assert_eq!((w[(1, 2)], w[(2, 1)]), (1.0, 1.0));
        assert_eq!(w[(0, 0)], 2.0);
        assert_eq!(built.unmapped, 1);
        assert!(w.is_symmetric());
        let none: [(&str, &str); 1] = [("g9", "g8")];
        assert_eq!(
            build_mobility_network(&none, &grids, &idx).unwrap_err(),
            Error::EmptyAfterMapping
        );
    }

    #[test]
    fn single_link_metrics() {
        let mut gl = Matrix::zeros(6, 6);
        gl[(2, 5)] = 3.0;
        gl[(1, 1)] = 9.0; // self-flow is ignored
        let learned = FlowNetwork::new(gl, NetworkKind::Learned, Level::Subzone, labels(6)).unwrap();
        let mobility =
            FlowNetwork::new(Matrix::filled(6, 6, 1.0), NetworkKind::Mobility, Level::Subzone, labels(6)).unwrap();
        let m = region_metrics(&learned, &mobility, &[10.0; 6]).unwrap();
        assert_eq!(m.transmission_in, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.transmission_out, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.mobility_ratio, [1.0; 6]);
    }

    #[test]
    fn mismatched_networks_rejected() {
        let a = FlowNetwork::new(Matrix::zeros(2, 2), NetworkKind::Learned, Level::Subzone, labels(2)).unwrap();
        let b = FlowNetwork::new(
            Matrix::zeros(2, 2),
            NetworkKind::Mobility,
            Level::Subzone,
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        assert_eq!(region_metrics(&a, &b, &[1.0, 1.0]), Err(Error::LabelMismatch));
        assert!(region_metrics(&a, &a, &[1.0]).is_err());
    }

    #[test]
    fn rollup_full_collapse_and_identity() {
        let w = Matrix::from_rows(&[[1.0, 2.0, 0.5], [0.0, 3.0, 1.0], [4.0, 0.0, 0.25]]).unwrap();
        let net = FlowNetwork::new(w.clone(), NetworkKind::Learned, Level::Subzone, labels(3)).unwrap();
        let one = rollup_planning_areas(&net, &index(&["A", "A", "A"])).unwrap();
        assert_eq!(one.weights.as_slice(), &[w.sum()]);
        assert_eq!(one.level, Level::PlanningArea);
        let same = rollup_planning_areas(&net, &index(&["A", "B", "C"])).unwrap();
        assert_eq!(same.weights, w);
        assert_eq!(same.labels, ["A", "B", "C"]);
    }

    #[test]
    fn rollup_missing_area() {
        let mut idx_subzones = index(&["A", "B"]).subzones().to_vec();
        idx_subzones[1].planning_area = None;
        let idx = SubzoneIndex::new(idx_subzones).unwrap();
        let net = FlowNetwork::new(Matrix::zeros(2, 2), NetworkKind::Learned, Level::Subzone, labels(2)).unwrap();
        assert_eq!(
            rollup_planning_areas(&net, &idx).unwrap_err(),
            Error::MissingPlanningArea("S1".into())
        );
    }
}
