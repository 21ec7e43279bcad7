//! Scenario runner: configuration, point-particle oracles, experiments and
//! JSON reports.

pub mod config;
pub mod experiments;
pub mod oracles;
pub mod report;

pub use config::RunConfig;
pub use experiments::{run_evolve, run_experiment, run_groundstate, EXPERIMENTS};
pub use report::{Report, Verdict};
