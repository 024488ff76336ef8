//! Experiment harness: run configs, sweeps, attack campaigns, plots and the CLI.

pub mod attack;
pub mod cli;
pub mod config;
pub mod metrics;
pub mod plot;
pub mod reference;
pub mod sweep;
pub mod table;
