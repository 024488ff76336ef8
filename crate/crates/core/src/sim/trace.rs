use serde::{Deserialize, Serialize};

use crate::controller::PhaseTag;
use crate::plants::{ActuatorCommand, Observation, PlantKind};
use crate::security::attacker::AttackOutcome;

/// One simulation step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    /// Plant state at the start of the step.
    pub observation: Observation,
    /// Controller phase that governed this step.
    pub phase: PhaseTag,
    /// Whether the controller itself produced `command` (false means the
    /// actuator hold policy did).
    pub controller_output: bool,
    pub command: ActuatorCommand,
    pub reset: bool,
    pub epoch: u64,
    /// Interval chosen and metric seen by the scheduler, on reset rows.
    pub reset_interval: Option<f64>,
    pub reset_metric: Option<f64>,
    pub attacker_progress: f64,
    pub attack_success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceLog {
    pub plant: PlantKind,
    pub dt: f64,
    pub rows: Vec<TraceRow>,
    pub attack: Option<AttackOutcome>,
}

impl TraceLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn reset_times(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.reset).map(|r| r.t).collect()
    }

    pub fn reset_count(&self) -> usize {
        self.rows.iter().filter(|r| r.reset).count()
    }

    /// Rows at or after `t0`.
    pub fn window(&self, t0: f64) -> &[TraceRow] {
        let start = self.rows.partition_point(|r| r.t < t0 - 1e-12);
        &self.rows[start..]
    }
}
