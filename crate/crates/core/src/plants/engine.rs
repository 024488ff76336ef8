//! Lumped crankshaft model.
//!
//! `J dω/dt = τ_ign(ω)·[ignition] − b·ω − τ_c`, explicit Euler. The ignition
//! torque follows a falling torque-speed curve that reaches zero at
//! `cutoff_rpm`; `peak_torque` is calibrated so that full ignition holds the
//! engine exactly at `nominal_rpm`. Below nominal the surplus torque pulls
//! the engine back quickly, which is what lets it ride through short
//! ignition gaps.

use serde::{Deserialize, Serialize};

pub const RPM_TO_RAD_S: f64 = std::f64::consts::PI / 30.0;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    /// kg·m²
    pub inertia: f64,
    /// Ignition torque at zero speed, N·m.
    pub peak_torque: f64,
    /// Speed at which ignition torque falls to zero.
    pub cutoff_rpm: f64,
    /// N·m·s
    pub viscous_friction: f64,
    /// N·m
    pub coulomb_friction: f64,
    pub nominal_rpm: f64,
    pub stall_rpm: f64,
    pub initial_rpm: f64,
}

impl EngineParams {
    /// Build a parameter set whose full-ignition equilibrium is
    /// `nominal_rpm` and whose unpowered spin-down time constant is
    /// `inertia / viscous_friction`.
    pub fn calibrated(
        nominal_rpm: f64,
        cutoff_rpm: f64,
        inertia: f64,
        spin_down_time_constant: f64,
        coulomb_share: f64,
    ) -> Self {
        let w = nominal_rpm * RPM_TO_RAD_S;
        let viscous_friction = inertia / spin_down_time_constant;
        let coulomb_friction = coulomb_share * viscous_friction * w;
        let load = viscous_friction * w + coulomb_friction;
        let peak_torque = load / (1.0 - nominal_rpm / cutoff_rpm);
        Self {
            inertia,
            peak_torque,
            cutoff_rpm,
            viscous_friction,
            coulomb_friction,
            nominal_rpm,
            stall_rpm: 600.0,
            initial_rpm: nominal_rpm,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("inertia", self.inertia),
            ("peak_torque", self.peak_torque),
            ("cutoff_rpm", self.cutoff_rpm),
            ("nominal_rpm", self.nominal_rpm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("engine {name} must be > 0"));
            }
        }
        if self.viscous_friction < 0.0 || self.coulomb_friction < 0.0 {
            return Err("engine friction must be >= 0".into());
        }
        if !(self.stall_rpm >= 0.0 && self.stall_rpm < self.nominal_rpm) {
            return Err("engine stall_rpm must be in [0, nominal_rpm)".into());
        }
        if !(self.initial_rpm >= 0.0 && self.initial_rpm.is_finite()) {
            return Err("engine initial_rpm must be >= 0".into());
        }
        Ok(())
    }

    /// Ignition torque available at speed `omega` (rad/s).
    pub fn ignition_torque(&self, omega: f64) -> f64 {
        let cutoff = self.cutoff_rpm * RPM_TO_RAD_S;
        self.peak_torque * (1.0 - omega / cutoff).clamp(0.0, 1.0)
    }

    /// Period of one engine cycle (one revolution) at `rpm`.
    pub fn cycle_period(rpm: f64) -> f64 {
        60.0 / rpm
    }
}

impl Default for EngineParams {
    /// 4500 RPM nominal, 4750 RPM torque cutoff, 0.15 kg·m², 2 s spin-down
    /// constant, Coulomb friction a quarter of the viscous load at nominal.
    fn default() -> Self {
        Self::calibrated(4500.0, 4750.0, 0.15, 2.0, 0.25)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    /// rad/s
    pub omega: f64,
    /// rad, unwrapped
    pub crank_angle: f64,
    /// Completed revolutions.
    pub cycles: u64,
    pub stalled: bool,
}

impl EngineState {
    pub fn new(params: &EngineParams) -> Self {
        Self {
            omega: params.initial_rpm * RPM_TO_RAD_S,
            crank_angle: 0.0,
            cycles: 0,
            stalled: false,
        }
    }

    pub fn rpm(&self) -> f64 {
        self.omega / RPM_TO_RAD_S
    }
}

/// Advance the engine by one step.
pub fn engine_step(params: &EngineParams, state: &mut EngineState, ignition_active: bool, dt: f64) {
    let w = state.omega;
    let drive = if ignition_active && !state.stalled {
        params.ignition_torque(w)
    } else {
        0.0
    };
    let friction = if w > 0.0 {
        params.viscous_friction * w + params.coulomb_friction
    } else {
        0.0
    };
    let accel = (drive - friction) / params.inertia;
    state.crank_angle += w * dt;
    state.cycles = (state.crank_angle / std::f64::consts::TAU) as u64;
    state.omega = (w + accel * dt).max(0.0);
    if state.omega < params.stall_rpm * RPM_TO_RAD_S {
        state.stalled = true;
    }
}
