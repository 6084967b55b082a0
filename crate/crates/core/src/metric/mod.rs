//! Discrete action metrics, their homogenized limits, and periodic graph metrics.

mod action;
mod cell;
mod graph;
mod report;

pub use action::{DiscreteActionMetric, DiscretePath, MetricOptions, Node, ReachField};
pub use cell::DiscreteCell;
pub use graph::{PeriodicGraphMetric, StableNorm};
pub use report::{bounded_growth, homogenized_metric, metric_inequality_report, InequalityReport, InequalityRow, InequalitySamples};
