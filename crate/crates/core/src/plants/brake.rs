use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrakeParams {
    /// Deceleration while the brake controller is commanding, m/s².
    pub brake_deceleration: f64,
    /// Deceleration while released (no controller output), m/s².
    pub coast_deceleration: f64,
    /// m/s
    pub initial_speed: f64,
}

impl Default for BrakeParams {
    fn default() -> Self {
        Self {
            brake_deceleration: 8.0,
            coast_deceleration: 0.0,
            initial_speed: 30.0,
        }
    }
}

impl BrakeParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.brake_deceleration > 0.0 && self.brake_deceleration.is_finite()) {
            return Err("brake_deceleration must be > 0".into());
        }
        if !(self.coast_deceleration >= 0.0 && self.coast_deceleration.is_finite()) {
            return Err("coast_deceleration must be >= 0".into());
        }
        if !(self.initial_speed >= 0.0 && self.initial_speed.is_finite()) {
            return Err("initial_speed must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BrakeState {
    /// m/s
    pub speed: f64,
    /// m
    pub distance: f64,
}

/// Constant deceleration per step, clamped at standstill. Distance is exact
/// for piecewise-constant deceleration.
pub fn brake_step(params: &BrakeParams, state: &mut BrakeState, braking_active: bool, dt: f64) {
    let a = if braking_active {
        params.brake_deceleration
    } else {
        params.coast_deceleration
    };
    let v = state.speed;
    let v_next = v - a * dt;
    if v_next <= 0.0 {
        if v > 0.0 && a > 0.0 {
            state.distance += v * v / (2.0 * a);
        }
        state.speed = 0.0;
    } else {
        state.distance += 0.5 * (v + v_next) * dt;
        state.speed = v_next;
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid reset window: d_R ({downtime}) must be in [0, T_R = {interval})")]
pub struct InvalidWindow {
    pub interval: f64,
    pub downtime: f64,
}

/// Time-averaged deceleration when the brake is released for `downtime`
/// out of every `interval`.
pub fn effective_deceleration(
    brake_deceleration: f64,
    coast_deceleration: f64,
    interval: f64,
    downtime: f64,
) -> Result<f64, InvalidWindow> {
    if !(downtime >= 0.0 && downtime < interval) {
        return Err(InvalidWindow { interval, downtime });
    }
    Ok(brake_deceleration * (interval - downtime) / interval + coast_deceleration * downtime / interval)
}
