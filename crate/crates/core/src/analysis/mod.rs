//! Analysis of learned spreading matrices: week-over-week stability, yearly
//! networks, commuting-flow networks and the comparison between the two.

mod compare;
mod network;
mod ssim;

pub use compare::{compare_networks, jaccard_top_k, top_k, ComparisonReport, PairComparison};
pub use network::{
    aggregate_yearly, build_mobility_network, region_metrics, rollup_planning_areas, FlowNetwork,
    Level, MobilityBuild, NetworkKind, RegionMetrics, YearlyAggregate,
};
pub use ssim::{consecutive_ssim, row_normalize, ssim};
