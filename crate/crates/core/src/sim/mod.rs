//! Fixed-step lockstep kernel.
//!
//! Each step runs, in order: scheduler (may fire a reset), controller tick,
//! attacker, then plant integration together with hardware timers (flash).
//! A scenario's run is a pure function of the scenario and its seed.

pub mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{steps_ceil, SimClock, DEFAULT_DT};
use crate::controller::{ControllerConfig, ControllerError, ControllerState, PhaseTag};
use crate::plants::{hold_policy, ActuatorCommand, Plant, PlantConfig};
use crate::rng::{streams, RngStream};
use crate::scheduler::{ResetMode, ResetScheduler};
use crate::security::attacker::{AttackOutcome, Attacker, AttackerModel};
use crate::security::diversify::DiversificationStrategy;
pub use trace::{TraceLog, TraceRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("numerical divergence at t = {t}: plant state is not finite")]
    NumericalDivergence { t: f64 },
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub plant: PlantConfig,
    pub controller: ControllerConfig,
    /// `None` runs the plant without resets (baseline).
    pub scheduler: Option<ResetMode>,
    pub diversification: DiversificationStrategy,
    pub attacker: Option<AttackerModel>,
    /// s
    pub horizon: f64,
    /// s
    pub dt: f64,
    pub seed: u64,
}

impl Scenario {
    /// Scenario with per-plant controller defaults and path randomization.
    pub fn new(plant: PlantConfig, scheduler: Option<ResetMode>, horizon: f64, seed: u64) -> Self {
        Self {
            controller: ControllerConfig::for_plant(plant.kind()),
            plant,
            scheduler,
            diversification: DiversificationStrategy::default(),
            attacker: None,
            horizon,
            dt: DEFAULT_DT,
            seed,
        }
    }

    pub fn with_downtime(mut self, downtime: f64) -> Self {
        use crate::controller::ResetStrategyConfig as R;
        self.controller.reset = match self.controller.reset {
            R::PowerCycle { .. } => R::PowerCycle { downtime },
            R::SnapshotRestore { .. } => R::SnapshotRestore { downtime },
        };
        self
    }

    pub fn downtime(&self) -> f64 {
        self.controller.reset.downtime()
    }

    /// Number of steps (and trace rows) in a run.
    pub fn steps(&self) -> u64 {
        steps_ceil(self.horizon, self.dt)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if SimClock::new(self.dt).is_none() {
            return bad(format!("dt must be in (0, 0.001], got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be > 0".into());
        }
        self.plant.validate().or_else(bad)?;
        self.controller.validate(self.dt).or_else(bad)?;
        self.diversification.validate().or_else(bad)?;
        if let Some(a) = &self.attacker {
            a.validate().or_else(bad)?;
            if let AttackerModel::FlashPersist { sector } = a {
                if *sector >= self.controller.flash.sectors {
                    return bad(format!("attacker targets flash sector {sector}, which does not exist"));
                }
            }
        }
        if let Some(mode) = &self.scheduler {
            mode.validate().map_err(|e| SimError::InvalidScenario(e.to_string()))?;
            let first = match mode {
                ResetMode::Adaptive { min, .. } => *min,
                m => m.max_interval(),
            };
            if self.horizon + 1e-12 < first {
                return bad(format!("horizon {} shorter than one reset interval ({first})", self.horizon));
            }
            let d = self.downtime();
            if d >= mode.min_interval() {
                return bad(format!(
                    "reset downtime d_R = {d} must be shorter than the reset interval {}",
                    mode.min_interval()
                ));
            }
        }
        let latency = self.controller.nominal_latency * self.diversification.slowdown();
        if latency > self.controller.control_period + 1e-12 {
            return Err(ControllerError::DeadlineViolation {
                latency,
                period: self.controller.control_period,
            }
            .into());
        }
        Ok(())
    }
}

/// All mutable state of one scenario run.
#[derive(Clone, Debug)]
pub struct World {
    clock: SimClock,
    total_steps: u64,
    plant: Plant,
    controller: ControllerState,
    scheduler: Option<ResetScheduler>,
    attacker: Option<Attacker>,
    diversification: DiversificationStrategy,
    scheduler_rng: RngStream,
    diversify_rng: RngStream,
    applied: ActuatorCommand,
}

impl World {
    pub fn new(scenario: &Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let root = RngStream::new(scenario.seed);
        let mut diversify_rng = root.split(streams::DIVERSIFY);
        let clock = SimClock::new(scenario.dt).expect("validated");
        let plant = Plant::new(&scenario.plant, root.split(streams::WIND));
        let controller = ControllerState::new(
            &scenario.controller,
            &scenario.plant,
            &scenario.diversification,
            scenario.dt,
            &mut diversify_rng,
        )?;
        let attacker = scenario
            .attacker
            .clone()
            .map(|m| Attacker::new(m, root.split(streams::ATTACKER), scenario.dt));
        Ok(Self {
            clock,
            total_steps: scenario.steps(),
            applied: plant.initial_command(),
            plant,
            controller,
            scheduler: scenario.scheduler.clone().map(|m| ResetScheduler::new(m, scenario.dt)),
            attacker,
            diversification: scenario.diversification.clone(),
            scheduler_rng: root.split(streams::SCHEDULER),
            diversify_rng,
        })
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    pub fn is_done(&self) -> bool {
        self.clock.step() >= self.total_steps
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn controller(&self) -> &ControllerState {
        &self.controller
    }

    pub fn attacker(&self) -> Option<&Attacker> {
        self.attacker.as_ref()
    }

    pub fn attack_outcome(&self) -> Option<AttackOutcome> {
        self.attacker.as_ref().map(Attacker::outcome)
    }

    /// Advance the world by one `dt`.
    pub fn step(&mut self) -> Result<TraceRow, SimError> {
        let step = self.clock.step();
        let t = self.clock.now();
        let dt = self.clock.dt();

        let decision = match self.scheduler.as_mut() {
            Some(s) => s.poll(step, &mut self.scheduler_rng),
            None => None,
        };
        if decision.is_some() {
            let report = self
                .controller
                .apply_reset(&self.diversification, &mut self.diversify_rng)?;
            if let Some(a) = self.attacker.as_mut() {
                a.on_reset(report.secret_changed);
            }
        }

        let phase = self.controller.phase().tag();
        let observation = self.plant.observe();
        let output = self.controller.tick(&observation, t)?;
        self.applied = match output {
            Some(cmd) => cmd,
            None => hold_policy(self.applied),
        };

        if let Some(a) = self.attacker.as_mut() {
            a.step(phase, &mut self.controller, t);
        }

        self.plant.step(self.applied, t, dt);
        let epoch = self.controller.epoch();
        self.controller.flash_mut().advance(dt, epoch);
        if !self.plant.observe().is_finite() {
            return Err(SimError::NumericalDivergence { t: t + dt });
        }
        if let Some(s) = self.scheduler.as_mut() {
            s.observe(self.plant.disturbance_sample());
        }
        self.clock.advance();

        Ok(TraceRow {
            t,
            observation,
            phase,
            controller_output: output.is_some(),
            command: self.applied,
            reset: decision.is_some(),
            epoch,
            reset_interval: decision.map(|d| d.interval),
            reset_metric: decision.map(|d| d.metric),
            attacker_progress: self.attacker.as_ref().map_or(0.0, Attacker::progress),
            attack_success: self.attacker.as_ref().is_some_and(Attacker::succeeded),
        })
    }
}

/// Advance one step; see [`World::step`] for the ordering contract.
pub fn step_world(world: &mut World) -> Result<TraceRow, SimError> {
    world.step()
}

/// Run a scenario over `[0, horizon)` and record every step.
pub fn run_scenario(scenario: &Scenario) -> Result<TraceLog, SimError> {
    let mut world = World::new(scenario)?;
    let mut rows = Vec::with_capacity(world.total_steps as usize);
    while !world.is_done() {
        rows.push(world.step()?);
    }
    Ok(TraceLog {
        plant: scenario.plant.kind(),
        dt: scenario.dt,
        rows,
        attack: world.attack_outcome(),
    })
}

/// Run without recording, stopping early once an attacker has succeeded.
pub fn run_until_attack(scenario: &Scenario) -> Result<Option<AttackOutcome>, SimError> {
    let mut world = World::new(scenario)?;
    while !world.is_done() {
        world.step()?;
        if world.attacker.as_ref().is_some_and(Attacker::succeeded) {
            break;
        }
    }
    Ok(world.attack_outcome())
}

/// Phase of each row, for invariant checks.
pub fn phases(trace: &TraceLog) -> impl Iterator<Item = PhaseTag> + '_ {
    trace.rows.iter().map(|r| r.phase)
}
