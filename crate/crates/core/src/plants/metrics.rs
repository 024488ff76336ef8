//! Scalar metrics over recorded traces.

use thiserror::Error;

use crate::plants::{Observation, RPM_TO_RAD_S};
use crate::sim::TraceLog;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("engine stalled at t = {t}")]
    Stalled { t: f64 },
    #[error("trace has no rows after the {warmup} s warm-up")]
    EmptyWindow { warmup: f64 },
    #[error("metric {metric} does not apply to a {plant} trace")]
    WrongPlant { metric: &'static str, plant: &'static str },
    #[error("vehicle did not stop within the horizon")]
    DidNotStop,
}

/// Warm-up excluded from engine speed statistics, s.
pub const ENGINE_WARMUP: f64 = 2.0;

/// Mean engine speed after `warmup`, in percent of `nominal_rpm`.
/// Fails if the engine stalled anywhere in the trace.
pub fn engine_speed_ratio(trace: &TraceLog, nominal_rpm: f64, warmup: f64) -> Result<f64, MetricError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for row in &trace.rows {
        let Observation::Engine { omega, stalled, .. } = row.observation else {
            return Err(MetricError::WrongPlant { metric: "engine_speed_ratio", plant: trace.plant.name() });
        };
        if stalled {
            return Err(MetricError::Stalled { t: row.t });
        }
        if row.t >= warmup - 1e-12 {
            sum += omega;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricError::EmptyWindow { warmup });
    }
    Ok(100.0 * sum / n as f64 / (nominal_rpm * RPM_TO_RAD_S))
}

/// First time the engine was seen stalled, if ever.
pub fn engine_stall_time(trace: &TraceLog) -> Option<f64> {
    trace.rows.iter().find_map(|r| match r.observation {
        Observation::Engine { stalled: true, .. } => Some(r.t),
        _ => None,
    })
}

/// Pooled standard deviation of the three body rates after `warmup`:
/// `sqrt(mean over axes of the per-axis variance)`, rad/s.
pub fn attitude_rate_stddev(trace: &TraceLog, warmup: f64) -> Result<f64, MetricError> {
    let mut sum = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    let mut n = 0usize;
    for row in trace.window(warmup) {
        let Observation::Quad { rates, .. } = row.observation else {
            return Err(MetricError::WrongPlant { metric: "attitude_rate_stddev", plant: trace.plant.name() });
        };
        for i in 0..3 {
            sum[i] += rates[i];
            sq[i] += rates[i] * rates[i];
        }
        n += 1;
    }
    if n == 0 {
        return Err(MetricError::EmptyWindow { warmup });
    }
    let nf = n as f64;
    let var: f64 = (0..3).map(|i| (sq[i] / nf - (sum[i] / nf).powi(2)).max(0.0)).sum::<f64>() / 3.0;
    Ok(var.sqrt())
}

/// Time and distance at which the vehicle was first seen at rest. Time
/// resolution is one step; distance is exact.
pub fn brake_stop(trace: &TraceLog) -> Result<(f64, f64), MetricError> {
    for row in &trace.rows {
        let Observation::Brake { speed, distance } = row.observation else {
            return Err(MetricError::WrongPlant { metric: "brake_stop", plant: trace.plant.name() });
        };
        if speed <= 0.0 {
            return Ok((row.t, distance));
        }
    }
    Err(MetricError::DidNotStop)
}

pub fn reset_count(trace: &TraceLog) -> usize {
    trace.reset_count()
}
