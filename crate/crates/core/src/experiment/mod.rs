//! Experiment driver: config files, the two-step spend workload, simulated
//! runs with flat reports, and the verify suite.

mod config;
mod run;
pub mod verify;
mod workload;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{run_experiment, Outcome, Report};
pub use verify::{verify_suite, VerifyOptions, VerifySummary};
pub use workload::{build_workload, SpendPair, Workload, GENESIS_ACCOUNT, ISSUANCE, RAMP_AMOUNT};
