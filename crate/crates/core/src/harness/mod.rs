//! Scenario configuration, Monte Carlo experiment runners, metrics and
//! CSV reporting.

pub mod config;
pub mod metrics;
pub mod report;
pub mod runner;

pub use config::{RunConfig, ScenarioConfig, SignalDirect, Visibility};
pub use report::{to_csv, write_csv, ExperimentRow, Metric};
pub use runner::{run_oracle_checks, run_runtime, run_ser, run_throughput, Sweep, SweepVar};
