//! Experiment runner behind the `ssf-lab` binary: strict TOML configs with
//! command-line overrides, report files, a run manifest and exit codes
//! (0 success, 1 could not run, 2 a requested check failed).

mod config;
mod run;
mod selftest;

pub use config::{
    apply_override, parse_config, ExperimentConfig, ExperimentKind, ModelConfig, PlanConfig, ProfileConfig,
};
pub use run::{run_config, run_file, CheckResult, RunOutcome, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK};
pub use selftest::{selftest, SelftestCase, CASES};
