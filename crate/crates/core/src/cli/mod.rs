//! Command-line harness: loads experiment configs, runs the verification
//! suites, and emits CSV/JSON reports and golden files.
//!
//! Exit codes: 0 when every asserted check passes, 1 on assertion
//! failure, 2 on configuration errors.

mod config;
mod experiments;
mod report;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{regen_goldens, run, Overrides, RunError, GOLDEN_PIPELINE_SEED};
pub use report::{config_hash, Check, ReportWriter, Summary, WORKBENCH_VERSION};
