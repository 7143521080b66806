//! Scenario files, the run loop, metrics and output artifacts.

mod diagnostics;
mod metrics;
mod output;
pub mod paper;
mod run;
mod scenario;

pub use diagnostics::{diagnose, DeltaGraphReport, GraphReport, TopologyReport};
pub use metrics::{consensus_error, feasibility_residuals, mean_point, Metrics, Residuals};
pub use output::{trajectory_csv, write_atomic, write_json, write_trajectory_csv};
pub use paper::paper_scenario;
pub use run::{run, RunReport, Trajectory, Violation};
pub use scenario::{Assertions, Expected, Scenario};
