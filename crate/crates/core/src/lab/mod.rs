//! Rate experiments, configuration and report files.

mod config;
mod rate;
mod report;

pub use config::{parse_eps_ladder, ExperimentConfig, KeyValues, Route};
pub use rate::{fit_slope, oc_error, oc_metric_options, run_rate_experiment, RateReport, RateRow, RateStatus};
pub use report::{emit_report, ReportFormat};

#[cfg(test)]
mod tests;
