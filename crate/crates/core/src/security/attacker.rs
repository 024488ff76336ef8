//! Attacker models stepped alongside the controller.
//!
//! The attacker's code runs on the controller, so it makes progress on every
//! step the controller is not Down (Stabilizing counts). Progress tied to the
//! diversification secret is lost when a reset changes the secret; the
//! defeat-device accumulator lives in RAM and is lost on every reset.

use serde::{Deserialize, Serialize};

use crate::controller::{ControllerState, FlashOp, PhaseTag, SectorState};
use crate::rng::RngStream;

/// Slack for comparing accrued time with thresholds on the step grid.
const TIME_EPS: f64 = 1e-9;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackerModel {
    /// Succeeds once `collect_time` of uninvalidated runtime has been spent
    /// learning the secret.
    Disclosure { collect_time: f64 },
    /// Exhaustive search without replacement over `space` candidates at
    /// `rate` guesses per second.
    Guessing { rate: f64, space: u64 },
    /// Copy a flash sector to RAM, erase it, program the modified image.
    FlashPersist { sector: usize },
    /// Accumulate `accumulation_time` of observations to recognize test
    /// conditions.
    DefeatDevice { accumulation_time: f64 },
}

impl AttackerModel {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            AttackerModel::Disclosure { collect_time } if !(collect_time > 0.0 && collect_time.is_finite()) => {
                Err("disclosure collect_time must be > 0".into())
            }
            AttackerModel::Guessing { rate, space } if !(rate > 0.0 && rate.is_finite()) || space < 1 => {
                Err("guessing needs rate > 0 and space >= 1".into())
            }
            AttackerModel::DefeatDevice { accumulation_time }
                if !(accumulation_time > 0.0 && accumulation_time.is_finite()) =>
            {
                Err("defeat device accumulation_time must be > 0".into())
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackerModel::Disclosure { .. } => "disclosure",
            AttackerModel::Guessing { .. } => "guessing",
            AttackerModel::FlashPersist { .. } => "flash_persist",
            AttackerModel::DefeatDevice { .. } => "defeat_device",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlashStage {
    #[default]
    Idle,
    Erasing,
    Programming,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackerState {
    /// Steps of progress toward the goal within the current epoch (or across
    /// epochs when nothing invalidates it).
    pub progress_steps: u64,
    pub guesses: u64,
    /// Rank of the secret in the attacker's guess order, `1..=space`;
    /// zero until drawn.
    pub target_rank: u64,
    pub flash_stage: FlashStage,
    pub accumulator_steps: u64,
    pub succeeded: bool,
    pub success_time: Option<f64>,
    pub epochs_survived: u64,
    uptime_this_epoch: u64,
}

impl AttackerState {
    pub fn progress_time(&self, dt: f64) -> f64 {
        self.progress_steps as f64 * dt
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub succeeded: bool,
    pub success_time: Option<f64>,
    pub epochs_survived: u64,
}

/// Byte pattern the flash attacker tries to make persistent.
pub const PERSIST_PAYLOAD: [u8; 16] = *b"\xDE\xAD\xBE\xEFpersist-rkit";

#[derive(Clone, Debug)]
pub struct Attacker {
    model: AttackerModel,
    state: AttackerState,
    rng: RngStream,
    dt: f64,
}

impl Attacker {
    pub fn new(model: AttackerModel, rng: RngStream, dt: f64) -> Self {
        Self {
            model,
            state: AttackerState::default(),
            rng,
            dt,
        }
    }

    pub fn model(&self) -> &AttackerModel {
        &self.model
    }

    pub fn state(&self) -> &AttackerState {
        &self.state
    }

    pub fn succeeded(&self) -> bool {
        self.state.succeeded
    }

    pub fn outcome(&self) -> AttackOutcome {
        AttackOutcome {
            succeeded: self.state.succeeded,
            success_time: self.state.success_time,
            epochs_survived: self.state.epochs_survived,
        }
    }

    /// Scalar progress for traces: seconds of accrued work, or guesses tried.
    pub fn progress(&self) -> f64 {
        match self.model {
            AttackerModel::Guessing { .. } => self.state.guesses as f64,
            AttackerModel::DefeatDevice { .. } => self.state.accumulator_steps as f64 * self.dt,
            _ => self.state.progress_time(self.dt),
        }
    }

    /// A reset happened. `secret_changed` tells whether diversification
    /// produced a new secret.
    pub fn on_reset(&mut self, secret_changed: bool) {
        if self.state.succeeded {
            return;
        }
        if self.state.uptime_this_epoch > 0 {
            self.state.epochs_survived += 1;
        }
        self.state.uptime_this_epoch = 0;
        match self.model {
            AttackerModel::Disclosure { .. } | AttackerModel::Guessing { .. } => {
                if secret_changed {
                    self.state.progress_steps = 0;
                    self.state.guesses = 0;
                    self.state.target_rank = 0;
                }
            }
            AttackerModel::FlashPersist { .. } => {
                self.state.progress_steps = 0;
                self.state.flash_stage = FlashStage::Idle;
            }
            AttackerModel::DefeatDevice { .. } => {
                self.state.progress_steps = 0;
                self.state.accumulator_steps = 0;
            }
        }
    }

    /// One step. `phase` is the controller phase that governed this step;
    /// success is stamped at the end of the step (`now + dt`) except for
    /// flash persistence, which is observed when the write has landed.
    pub fn step(&mut self, phase: PhaseTag, controller: &mut ControllerState, now: f64) {
        if self.state.succeeded {
            return;
        }
        if let AttackerModel::FlashPersist { sector } = self.model {
            if payload_landed(controller, sector) {
                self.succeed(now);
                return;
            }
        }
        if phase == PhaseTag::Down {
            return;
        }
        self.state.uptime_this_epoch += 1;
        self.state.progress_steps += 1;
        let dt = self.dt;
        let end = now + dt;
        match self.model {
            AttackerModel::Disclosure { collect_time } => {
                if self.state.progress_time(dt) + TIME_EPS >= collect_time {
                    self.succeed(end);
                }
            }
            AttackerModel::Guessing { rate, space } => {
                if self.state.target_rank == 0 {
                    self.state.target_rank = 1 + self.rng.below(space);
                }
                let due = (rate * self.state.progress_time(dt) + TIME_EPS).floor() as u64;
                self.state.guesses = due.min(space);
                if self.state.guesses >= self.state.target_rank {
                    self.succeed(end);
                }
            }
            AttackerModel::FlashPersist { sector } => self.flash_step(controller, sector),
            AttackerModel::DefeatDevice { accumulation_time } => {
                self.state.accumulator_steps += 1;
                if self.state.accumulator_steps as f64 * dt + TIME_EPS >= accumulation_time {
                    self.succeed(end);
                }
            }
        }
    }

    fn flash_step(&mut self, controller: &mut ControllerState, sector: usize) {
        let epoch = controller.epoch();
        match self.state.flash_stage {
            FlashStage::Idle => {
                // Stage the sector image in RAM, patch it, then erase.
                if let Some(content) = controller.flash().sector(sector).and_then(|s| s.read()) {
                    let n = content.len().min(controller.ram().len());
                    let staged = content[..n].to_vec();
                    controller.ram_mut()[..n].copy_from_slice(&staged);
                }
                let n = PERSIST_PAYLOAD.len().min(controller.ram().len());
                controller.ram_mut()[..n].copy_from_slice(&PERSIST_PAYLOAD[..n]);
                if controller.flash_mut().begin(sector, FlashOp::Erase, &[], epoch).is_ok() {
                    self.state.flash_stage = FlashStage::Erasing;
                }
            }
            FlashStage::Erasing => {
                let erased = controller
                    .flash()
                    .sector(sector)
                    .is_some_and(|s| s.state() == SectorState::Valid);
                if erased {
                    let n = controller.flash().sector_size().min(controller.ram().len());
                    let image = controller.ram()[..n].to_vec();
                    if controller.flash_mut().begin(sector, FlashOp::Program, &image, epoch).is_ok() {
                        self.state.flash_stage = FlashStage::Programming;
                    }
                }
            }
            FlashStage::Programming => {}
        }
    }

    fn succeed(&mut self, t: f64) {
        self.state.succeeded = true;
        self.state.success_time = Some(t);
    }
}

fn payload_landed(controller: &ControllerState, sector: usize) -> bool {
    controller
        .flash()
        .sector(sector)
        .and_then(|s| s.read())
        .is_some_and(|c| c.starts_with(&PERSIST_PAYLOAD))
}
