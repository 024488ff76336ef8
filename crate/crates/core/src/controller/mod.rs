//! Microcontroller lifecycle: Down → Stabilizing → Stable, reset strategies,
//! control laws and the memory the controller owns.

pub mod flash;
pub mod snapshot;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::steps_ceil;
use crate::plants::quad::mix;
use crate::plants::{ActuatorCommand, EngineParams, Observation, PlantConfig, PlantKind, QuadParams};
use crate::rng::RngStream;
use crate::security::diversify::{diversify, DiversificationStrategy};
pub use flash::{FlashConfig, FlashError, FlashModel, FlashOp, SectorState};
pub use snapshot::{Snapshot, SnapshotError};

/// Engine cycles the ECU must observe after boot: two to synchronize with
/// the crank and a third to estimate acceleration.
pub const ENGINE_STABILIZATION_CYCLES: u32 = 3;

const DEADLINE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("deadline violation: effective latency {latency} s exceeds control period {period} s")]
    DeadlineViolation { latency: f64, period: f64 },
    #[error("snapshot integrity failure: digest mismatch, restore refused")]
    SnapshotIntegrity,
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Flash(#[from] FlashError),
    #[error("invalid controller configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControllerPhase {
    /// Rebooting or restoring; no output.
    Down { remaining_steps: u64 },
    /// Observing the plant before the first valid output.
    Stabilizing { samples_observed: u32 },
    Stable,
}

/// Phase without its payload, as recorded in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseTag {
    Down,
    Stabilizing,
    Stable,
}

impl PhaseTag {
    pub fn name(self) -> &'static str {
        match self {
            PhaseTag::Down => "down",
            PhaseTag::Stabilizing => "stabilizing",
            PhaseTag::Stable => "stable",
        }
    }
}

impl ControllerPhase {
    pub fn tag(&self) -> PhaseTag {
        match self {
            ControllerPhase::Down { .. } => PhaseTag::Down,
            ControllerPhase::Stabilizing { .. } => PhaseTag::Stabilizing,
            ControllerPhase::Stable => PhaseTag::Stable,
        }
    }

    /// Remaining downtime in seconds, zero outside Down.
    pub fn remaining(&self, dt: f64) -> f64 {
        match self {
            ControllerPhase::Down { remaining_steps } => *remaining_steps as f64 * dt,
            _ => 0.0,
        }
    }
}

/// Reset strategy as configured.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResetStrategyConfig {
    /// Full power cycle: RAM comes back zeroed.
    PowerCycle { downtime: f64 },
    /// Replay a verified RAM snapshot taken in a secure environment.
    SnapshotRestore { downtime: f64 },
}

impl ResetStrategyConfig {
    /// ECU power cycle, 20 ms.
    pub fn ecu_power_cycle() -> Self {
        ResetStrategyConfig::PowerCycle { downtime: 0.020 }
    }

    /// Flight-controller snapshot restore, 3 ms.
    pub fn fc_snapshot_restore() -> Self {
        ResetStrategyConfig::SnapshotRestore { downtime: 0.003 }
    }

    /// Flight-controller full reboot, 1.5 s.
    pub fn fc_full_reboot() -> Self {
        ResetStrategyConfig::PowerCycle { downtime: 1.5 }
    }

    pub fn downtime(&self) -> f64 {
        match *self {
            ResetStrategyConfig::PowerCycle { downtime } | ResetStrategyConfig::SnapshotRestore { downtime } => downtime,
        }
    }
}

/// Reset strategy with its runtime material.
#[derive(Clone, Debug, PartialEq)]
pub enum ResetStrategy {
    PowerCycle { downtime: f64 },
    SnapshotRestore { downtime: f64, snapshot: Snapshot },
}

impl ResetStrategy {
    pub fn downtime(&self) -> f64 {
        match self {
            ResetStrategy::PowerCycle { downtime } | ResetStrategy::SnapshotRestore { downtime, .. } => *downtime,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub reset: ResetStrategyConfig,
    /// Worst-case execution time of one control step without diversification.
    pub nominal_latency: f64,
    pub control_period: f64,
    /// bytes
    pub ram_size: usize,
    pub flash: FlashConfig,
    /// Values that survive every reset (calibration, waypoints).
    pub persisted: BTreeMap<String, f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self::for_plant(PlantKind::Engine)
    }
}

impl ControllerConfig {
    /// Defaults per platform: the ECU power-cycles in 20 ms and runs a 1 ms
    /// task; the flight controller restores a snapshot in 3 ms and runs its
    /// attitude loop at 250 Hz; the brake controller reuses the ECU numbers.
    pub fn for_plant(kind: PlantKind) -> Self {
        let (reset, nominal_latency, control_period) = match kind {
            PlantKind::Engine | PlantKind::Brake => (ResetStrategyConfig::ecu_power_cycle(), 0.0002, 0.001),
            PlantKind::Quad => (ResetStrategyConfig::fc_snapshot_restore(), 0.001, 0.004),
        };
        Self {
            reset,
            nominal_latency,
            control_period,
            ram_size: 32 * 1024,
            flash: FlashConfig::default(),
            persisted: BTreeMap::new(),
        }
    }

    pub fn validate(&self, dt: f64) -> Result<(), String> {
        let d = self.reset.downtime();
        if !(d >= 0.0 && d.is_finite()) {
            return Err("reset downtime must be >= 0".into());
        }
        if !(self.nominal_latency >= 0.0 && self.nominal_latency.is_finite()) {
            return Err("nominal_latency must be >= 0".into());
        }
        if !(self.control_period >= dt && self.control_period.is_finite()) {
            return Err(format!("control_period must be >= dt ({dt})"));
        }
        if self.ram_size == 0 {
            return Err("ram_size must be > 0".into());
        }
        self.flash.validate()
    }
}

/// Plant-specific control law with its gains and setpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlLaw {
    /// Enable ignition every cycle once synchronized.
    Engine,
    /// Attitude PD: `τ = −K_angle (angle − setpoint) − K_rate · rate`.
    Quad { params: QuadParams, setpoint: [f64; 3] },
    /// Constant demanded deceleration.
    Brake,
}

impl ControlLaw {
    pub fn for_plant(plant: &PlantConfig) -> Self {
        match plant {
            PlantConfig::Engine { .. } => ControlLaw::Engine,
            PlantConfig::Quad { params, .. } => ControlLaw::Quad {
                params: params.clone(),
                setpoint: [0.0; 3],
            },
            PlantConfig::Brake { .. } => ControlLaw::Brake,
        }
    }
}

pub fn control_law(law: &ControlLaw, observation: &Observation) -> ActuatorCommand {
    match (law, observation) {
        (ControlLaw::Engine, Observation::Engine { stalled, .. }) => ActuatorCommand::Ignition(!stalled),
        (ControlLaw::Quad { params, setpoint }, Observation::Quad { angles, rates }) => {
            let torque =
                [0, 1, 2].map(|i| -params.angle_gain[i] * (angles[i] - setpoint[i]) - params.rate_gain[i] * rates[i]);
            ActuatorCommand::Motors(mix(params, params.hover_thrust, torque))
        }
        (ControlLaw::Brake, Observation::Brake { .. }) => ActuatorCommand::Brake(true),
        (ControlLaw::Engine, _) => ActuatorCommand::Ignition(false),
        (ControlLaw::Quad { params, .. }, _) => ActuatorCommand::Motors([params.hover_thrust; 4]),
        (ControlLaw::Brake, _) => ActuatorCommand::Brake(false),
    }
}

/// `d_S` for a plant at its nominal operating point.
pub fn stabilization_time(plant: &PlantConfig) -> f64 {
    match plant {
        PlantConfig::Engine { params } => {
            ENGINE_STABILIZATION_CYCLES as f64 * EngineParams::cycle_period(params.nominal_rpm)
        }
        PlantConfig::Quad { params, .. } => params.estimator_samples as f64 * params.sample_period(),
        PlantConfig::Brake { .. } => 0.0,
    }
}

/// How the Stabilizing phase counts observation samples.
#[derive(Clone, Copy, Debug, PartialEq)]
enum SampleClock {
    /// One sample per completed crank revolution.
    CrankRevolutions,
    /// One sample every `steps` simulation steps.
    Periodic { steps: u64 },
    None,
}

/// What a reset did, for the world and the attacker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResetReport {
    pub secret_changed: bool,
    pub aborted_flash_ops: usize,
}

#[derive(Clone, Debug)]
pub struct ControllerState {
    phase: ControllerPhase,
    ram: Vec<u8>,
    flash: FlashModel,
    secret: u32,
    epoch: u64,
    nominal_latency: f64,
    slowdown: f64,
    control_period: f64,
    strategy: ResetStrategy,
    persisted: BTreeMap<String, f64>,
    law: ControlLaw,
    dt: f64,
    period_steps: u64,
    required_samples: u32,
    sample_clock: SampleClock,
    sample_accum: f64,
    sample_steps: u64,
    stable_steps: u64,
    last_command: Option<ActuatorCommand>,
}

impl ControllerState {
    /// A running (Stable) controller. For snapshot restore the snapshot is
    /// captured here, before any attacker is attached.
    pub fn new(
        config: &ControllerConfig,
        plant: &PlantConfig,
        strategy: &DiversificationStrategy,
        dt: f64,
        rng: &mut RngStream,
    ) -> Result<Self, ControllerError> {
        config.validate(dt).map_err(ControllerError::Config)?;
        let ram: Vec<u8> = (0..config.ram_size).map(|i| (i % 253) as u8).collect();
        let (required_samples, sample_clock) = match plant {
            PlantConfig::Engine { .. } => (ENGINE_STABILIZATION_CYCLES, SampleClock::CrankRevolutions),
            PlantConfig::Quad { params, .. } => (
                params.estimator_samples,
                SampleClock::Periodic {
                    steps: steps_ceil(params.sample_period(), dt).max(1),
                },
            ),
            PlantConfig::Brake { .. } => (0, SampleClock::None),
        };
        let reset = match config.reset {
            ResetStrategyConfig::PowerCycle { downtime } => ResetStrategy::PowerCycle { downtime },
            ResetStrategyConfig::SnapshotRestore { downtime } => ResetStrategy::SnapshotRestore {
                downtime,
                snapshot: Snapshot::capture(&ram, &config.persisted, true, false)?,
            },
        };
        let state = Self {
            phase: ControllerPhase::Stable,
            ram,
            flash: FlashModel::new(&config.flash),
            secret: rng.next_secret(),
            epoch: 0,
            nominal_latency: config.nominal_latency,
            slowdown: strategy.slowdown(),
            control_period: config.control_period,
            strategy: reset,
            persisted: config.persisted.clone(),
            law: ControlLaw::for_plant(plant),
            dt,
            period_steps: steps_ceil(config.control_period, dt).max(1),
            required_samples,
            sample_clock,
            sample_accum: 0.0,
            sample_steps: 0,
            stable_steps: 0,
            last_command: None,
        };
        state.check_deadline()?;
        Ok(state)
    }

    pub fn phase(&self) -> ControllerPhase {
        self.phase
    }

    pub fn ram(&self) -> &[u8] {
        &self.ram
    }

    pub fn ram_mut(&mut self) -> &mut [u8] {
        &mut self.ram
    }

    pub fn flash(&self) -> &FlashModel {
        &self.flash
    }

    pub fn flash_mut(&mut self) -> &mut FlashModel {
        &mut self.flash
    }

    pub fn secret(&self) -> u32 {
        self.secret
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn slowdown(&self) -> f64 {
        self.slowdown
    }

    pub fn effective_latency(&self) -> f64 {
        self.nominal_latency * self.slowdown
    }

    pub fn control_period(&self) -> f64 {
        self.control_period
    }

    pub fn strategy(&self) -> &ResetStrategy {
        &self.strategy
    }

    pub fn strategy_mut(&mut self) -> &mut ResetStrategy {
        &mut self.strategy
    }

    pub fn persisted(&self) -> &BTreeMap<String, f64> {
        &self.persisted
    }

    pub fn persisted_mut(&mut self) -> &mut BTreeMap<String, f64> {
        &mut self.persisted
    }

    pub fn required_samples(&self) -> u32 {
        self.required_samples
    }

    pub(crate) fn set_diversity(&mut self, secret: u32, slowdown: f64) {
        self.secret = secret;
        self.slowdown = slowdown;
    }

    pub(crate) fn bump_epoch(&mut self) {
        self.epoch += 1;
    }

    pub fn check_deadline(&self) -> Result<(), ControllerError> {
        let latency = self.effective_latency();
        if latency > self.control_period + DEADLINE_EPS {
            return Err(ControllerError::DeadlineViolation {
                latency,
                period: self.control_period,
            });
        }
        Ok(())
    }

    /// Capture a snapshot of the current RAM.
    pub fn snapshot_capture(&self, attacker_enabled: bool) -> Result<Snapshot, SnapshotError> {
        Snapshot::capture(
            &self.ram,
            &self.persisted,
            self.phase == ControllerPhase::Stable,
            attacker_enabled,
        )
    }

    fn enter_stabilizing(&mut self) {
        self.sample_accum = 0.0;
        self.sample_steps = 0;
        if self.required_samples == 0 {
            self.enter_stable();
        } else {
            self.phase = ControllerPhase::Stabilizing { samples_observed: 0 };
        }
    }

    fn enter_stable(&mut self) {
        self.phase = ControllerPhase::Stable;
        self.stable_steps = 0;
    }

    /// One simulation step of controller time. Returns the actuator command
    /// when Stable, `None` otherwise.
    pub fn tick(&mut self, observation: &Observation, _now: f64) -> Result<Option<ActuatorCommand>, ControllerError> {
        self.check_deadline()?;
        match self.phase {
            ControllerPhase::Down { remaining_steps } => {
                let left = remaining_steps.saturating_sub(1);
                if left == 0 {
                    self.enter_stabilizing();
                } else {
                    self.phase = ControllerPhase::Down { remaining_steps: left };
                }
                Ok(None)
            }
            ControllerPhase::Stabilizing { samples_observed } => {
                let observed = samples_observed + self.observe_samples(observation);
                if observed >= self.required_samples {
                    self.enter_stable();
                } else {
                    self.phase = ControllerPhase::Stabilizing { samples_observed: observed };
                }
                Ok(None)
            }
            ControllerPhase::Stable => {
                if self.stable_steps.is_multiple_of(self.period_steps) || self.last_command.is_none() {
                    self.last_command = Some(control_law(&self.law, observation));
                }
                self.stable_steps += 1;
                Ok(self.last_command)
            }
        }
    }

    fn observe_samples(&mut self, observation: &Observation) -> u32 {
        match self.sample_clock {
            SampleClock::CrankRevolutions => {
                if let Observation::Engine { omega, .. } = observation {
                    self.sample_accum += omega * self.dt;
                }
                let mut n = 0;
                while self.sample_accum >= std::f64::consts::TAU - 1e-9 {
                    self.sample_accum -= std::f64::consts::TAU;
                    n += 1;
                }
                n
            }
            SampleClock::Periodic { steps } => {
                self.sample_steps += 1;
                if self.sample_steps >= steps {
                    self.sample_steps = 0;
                    1
                } else {
                    0
                }
            }
            SampleClock::None => 0,
        }
    }

    /// Reset and diversify. RAM is zeroed (power cycle) or restored from a
    /// verified snapshot, in-flight flash operations are aborted, the phase
    /// becomes `Down{d_R}` and a new diversification epoch starts.
    pub fn apply_reset(
        &mut self,
        diversification: &DiversificationStrategy,
        rng: &mut RngStream,
    ) -> Result<ResetReport, ControllerError> {
        match &self.strategy {
            ResetStrategy::PowerCycle { .. } => self.ram.fill(0),
            ResetStrategy::SnapshotRestore { snapshot, .. } => {
                if !snapshot.verify() {
                    return Err(ControllerError::SnapshotIntegrity);
                }
                let image = snapshot.image();
                if image.len() == self.ram.len() {
                    self.ram.copy_from_slice(image);
                } else {
                    self.ram.clear();
                    self.ram.extend_from_slice(image);
                }
            }
        }
        let aborted_flash_ops = self.flash.abort_in_flight();
        self.last_command = None;
        let steps = steps_ceil(self.strategy.downtime(), self.dt);
        if steps == 0 {
            self.enter_stabilizing();
        } else {
            self.phase = ControllerPhase::Down { remaining_steps: steps };
        }
        let before = self.secret;
        diversify(diversification, self, rng);
        Ok(ResetReport {
            secret_changed: self.secret != before,
            aborted_flash_ops,
        })
    }
}
