//! Experiment driver: single trials, sweeps, margin analysis and the CLI.

pub mod cli;
pub mod config;
pub mod demo;
pub mod experiment;
pub mod margin;

pub use config::{parse_magnitude, ConfigFile, SimulationConfig};
pub use experiment::{
    random_operand, run_sweep, run_trial, run_trial_with_rng, trial_rng, SweepReport, TrialDetail,
    TrialReport,
};
pub use margin::{noise_margin, MarginReport};
