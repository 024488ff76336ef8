//! Deterministic co-simulation of periodically reset controllers driving
//! inertial plants, with per-reset diversification and attacker models.

pub mod clock;
pub mod controller;
pub mod plants;
pub mod rng;
pub mod scheduler;
pub mod security;
pub mod sim;

pub use sim::{run_scenario, Scenario, SimError, TraceLog, TraceRow, World};
