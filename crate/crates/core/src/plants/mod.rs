//! Continuous plant models and the metrics extracted from their traces.

pub mod brake;
pub mod engine;
pub mod metrics;
pub mod quad;

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
pub use brake::{brake_step, effective_deceleration, BrakeParams, BrakeState};
pub use engine::{engine_step, EngineParams, EngineState, RPM_TO_RAD_S};
pub use quad::{quad_step, QuadParams, QuadState, WindField, WindProfile, WindSegment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    Engine,
    Quad,
    Brake,
}

impl PlantKind {
    pub fn name(self) -> &'static str {
        match self {
            PlantKind::Engine => "engine",
            PlantKind::Quad => "quad",
            PlantKind::Brake => "brake",
        }
    }
}

/// Plant selector and parameters, as configured.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantConfig {
    Engine {
        #[serde(default)]
        params: EngineParams,
    },
    Quad {
        #[serde(default)]
        params: QuadParams,
        #[serde(default)]
        wind: WindProfile,
    },
    Brake {
        #[serde(default)]
        params: BrakeParams,
    },
}

impl PlantConfig {
    pub fn kind(&self) -> PlantKind {
        match self {
            PlantConfig::Engine { .. } => PlantKind::Engine,
            PlantConfig::Quad { .. } => PlantKind::Quad,
            PlantConfig::Brake { .. } => PlantKind::Brake,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            PlantConfig::Engine { params } => params.validate(),
            PlantConfig::Quad { params, wind } => params.validate().and_then(|_| wind.validate()),
            PlantConfig::Brake { params } => params.validate(),
        }
    }
}

/// What the controller sees of the plant at the start of a step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Engine { omega: f64, crank_angle: f64, stalled: bool },
    Quad { angles: [f64; 3], rates: [f64; 3] },
    Brake { speed: f64, distance: f64 },
}

impl Observation {
    pub fn is_finite(&self) -> bool {
        match self {
            Observation::Engine { omega, crank_angle, .. } => omega.is_finite() && crank_angle.is_finite(),
            Observation::Quad { angles, rates } => angles.iter().chain(rates).all(|v| v.is_finite()),
            Observation::Brake { speed, distance } => speed.is_finite() && distance.is_finite(),
        }
    }
}

/// Command applied to the actuators for one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ActuatorCommand {
    Ignition(bool),
    Motors([f64; 4]),
    Brake(bool),
}

/// Actuator behavior while the controller produces no output: motors latch
/// their last value, the engine misses its ignition events, the brake
/// releases.
pub fn hold_policy(last: ActuatorCommand) -> ActuatorCommand {
    match last {
        ActuatorCommand::Ignition(_) => ActuatorCommand::Ignition(false),
        m @ ActuatorCommand::Motors(_) => m,
        ActuatorCommand::Brake(_) => ActuatorCommand::Brake(false),
    }
}

/// A plant instance with its running state.
#[derive(Clone, Debug)]
pub enum Plant {
    Engine { params: EngineParams, state: EngineState },
    Quad { params: QuadParams, state: QuadState, wind: WindField },
    Brake { params: BrakeParams, state: BrakeState },
}

impl Plant {
    pub fn new(config: &PlantConfig, wind_rng: RngStream) -> Self {
        match config {
            PlantConfig::Engine { params } => Plant::Engine {
                state: EngineState::new(params),
                params: params.clone(),
            },
            PlantConfig::Quad { params, wind } => Plant::Quad {
                params: params.clone(),
                state: QuadState {
                    motors: [params.hover_thrust; 4],
                    ..QuadState::default()
                },
                wind: WindField::new(wind.clone(), wind_rng),
            },
            PlantConfig::Brake { params } => Plant::Brake {
                state: BrakeState {
                    speed: params.initial_speed,
                    distance: 0.0,
                },
                params: params.clone(),
            },
        }
    }

    pub fn kind(&self) -> PlantKind {
        match self {
            Plant::Engine { .. } => PlantKind::Engine,
            Plant::Quad { .. } => PlantKind::Quad,
            Plant::Brake { .. } => PlantKind::Brake,
        }
    }

    pub fn observe(&self) -> Observation {
        match self {
            Plant::Engine { state, .. } => Observation::Engine {
                omega: state.omega,
                crank_angle: state.crank_angle,
                stalled: state.stalled,
            },
            Plant::Quad { state, .. } => Observation::Quad {
                angles: state.angles,
                rates: state.rates,
            },
            Plant::Brake { state, .. } => Observation::Brake {
                speed: state.speed,
                distance: state.distance,
            },
        }
    }

    /// Command the actuators hold before the controller has said anything.
    pub fn initial_command(&self) -> ActuatorCommand {
        match self {
            Plant::Engine { .. } => ActuatorCommand::Ignition(false),
            Plant::Quad { params, .. } => ActuatorCommand::Motors([params.hover_thrust; 4]),
            Plant::Brake { .. } => ActuatorCommand::Brake(false),
        }
    }

    /// Integrate one step under `command`. A command of the wrong kind is
    /// treated as no drive.
    pub fn step(&mut self, command: ActuatorCommand, t: f64, dt: f64) {
        match self {
            Plant::Engine { params, state } => {
                let ignition = matches!(command, ActuatorCommand::Ignition(true));
                engine_step(params, state, ignition, dt);
            }
            Plant::Quad { params, state, wind } => {
                let motors = match command {
                    ActuatorCommand::Motors(m) => m,
                    _ => state.motors,
                };
                let torque = wind.sample(t, dt);
                quad_step(params, state, motors, torque, dt);
            }
            Plant::Brake { params, state } => {
                let braking = matches!(command, ActuatorCommand::Brake(true));
                brake_step(params, state, braking, dt);
            }
        }
    }

    /// Disturbance channels fed to the adaptive scheduler's metric window.
    pub fn disturbance_sample(&self) -> [f64; 3] {
        match self {
            Plant::Quad { state, .. } => state.rates,
            Plant::Engine { state, .. } => [state.omega, 0.0, 0.0],
            Plant::Brake { state, .. } => [state.speed, 0.0, 0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hold_policy_per_plant() {
        assert_eq!(hold_policy(ActuatorCommand::Ignition(true)), ActuatorCommand::Ignition(false));
        assert_eq!(hold_policy(ActuatorCommand::Brake(true)), ActuatorCommand::Brake(false));
        let m = ActuatorCommand::Motors([0.4, 0.6, 0.5, 0.5]);
        assert_eq!(hold_policy(m), m);
    }
}
