//! Per-run metrics and their fixed column order.

use resetsim_core::plants::metrics::{attitude_rate_stddev, brake_stop, engine_speed_ratio, engine_stall_time, MetricError};
use resetsim_core::plants::{effective_deceleration, PlantConfig, PlantKind};
use resetsim_core::scheduler::ResetMode;
use resetsim_core::sim::{run_scenario, SimError, TraceLog};
use thiserror::Error;

use crate::config::RunConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub const ENGINE_METRICS: [&str; 4] = ["speed_pct", "stalled", "stall_time", "reset_count"];
pub const QUAD_METRICS: [&str; 2] = ["rate_stddev", "reset_count"];
pub const BRAKE_METRICS: [&str; 4] = ["stop_time", "stop_distance", "effective_deceleration", "reset_count"];
pub const ATTACK_METRICS: [&str; 3] = ["attack_success", "attack_success_time", "epochs_survived"];

/// Metric columns for a plant, with attack columns when an attacker runs.
pub fn metric_names(kind: PlantKind, attacker: bool) -> Vec<&'static str> {
    let mut names: Vec<&'static str> = match kind {
        PlantKind::Engine => ENGINE_METRICS.to_vec(),
        PlantKind::Quad => QUAD_METRICS.to_vec(),
        PlantKind::Brake => BRAKE_METRICS.to_vec(),
    };
    if attacker {
        names.extend(ATTACK_METRICS);
    }
    names
}

/// Named metric values; `None` renders as an empty cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub values: Vec<(&'static str, Option<f64>)>,
}

impl Metrics {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| *n == name).and_then(|(_, v)| *v)
    }

    fn push(&mut self, name: &'static str, v: Option<f64>) {
        self.values.push((name, v));
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Metrics of a recorded trace. A stalled engine yields an empty speed
/// cell and `stalled = 1`, never a speed of 0%.
pub fn compute_metrics(config: &RunConfig, trace: &TraceLog) -> Result<Metrics, RunError> {
    let mut m = Metrics::default();
    let warmup = config.warmup();
    match &config.plant {
        PlantConfig::Engine { params } => {
            let stall = engine_stall_time(trace);
            let speed = match engine_speed_ratio(trace, params.nominal_rpm, warmup) {
                Ok(v) => Some(v),
                Err(MetricError::Stalled { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            m.push("speed_pct", speed);
            m.push("stalled", Some(flag(stall.is_some())));
            m.push("stall_time", stall);
        }
        PlantConfig::Quad { .. } => {
            m.push("rate_stddev", Some(attitude_rate_stddev(trace, warmup)?));
        }
        PlantConfig::Brake { params } => {
            let stop = brake_stop(trace).ok();
            m.push("stop_time", stop.map(|s| s.0));
            m.push("stop_distance", stop.map(|s| s.1));
            let scenario = config.scenario();
            let a_eff = match &config.scheduler {
                None => Some(params.brake_deceleration),
                Some(ResetMode::Periodic { interval }) => effective_deceleration(
                    params.brake_deceleration,
                    params.coast_deceleration,
                    *interval,
                    scenario.downtime(),
                )
                .ok(),
                Some(_) => None,
            };
            m.push("effective_deceleration", a_eff);
        }
    }
    m.push("reset_count", Some(trace.reset_count() as f64));
    if let Some(outcome) = trace.attack {
        m.push("attack_success", Some(flag(outcome.succeeded)));
        m.push("attack_success_time", outcome.success_time);
        m.push("epochs_survived", Some(outcome.epochs_survived as f64));
    }
    Ok(m)
}

/// Run one config and compute its metrics.
pub fn run_config(config: &RunConfig) -> Result<(TraceLog, Metrics), RunError> {
    let trace = run_scenario(&config.scenario())?;
    let metrics = compute_metrics(config, &trace)?;
    Ok((trace, metrics))
}
