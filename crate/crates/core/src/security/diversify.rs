use serde::{Deserialize, Serialize};

use crate::controller::ControllerState;
use crate::rng::RngStream;

/// Measured slowdown of execution-path randomization on the ECU.
pub const PATH_RANDOMIZATION_SLOWDOWN: f64 = 2.13;

/// Per-epoch diversification applied at every reset. Both active strategies
/// draw a fresh 32-bit secret.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiversificationStrategy {
    /// Execution-path randomization keyed by the secret; costs a constant
    /// slowdown on every control step.
    PathRandomization {
        #[serde(default = "default_path_slowdown")]
        slowdown: f64,
    },
    /// Re-key stack canaries / pointer masks; no measurable overhead.
    CanaryRekey {
        #[serde(default = "unit_slowdown")]
        slowdown: f64,
    },
    /// Resets without diversification.
    #[serde(rename = "none")]
    Disabled,
}

fn default_path_slowdown() -> f64 {
    PATH_RANDOMIZATION_SLOWDOWN
}

fn unit_slowdown() -> f64 {
    1.0
}

impl Default for DiversificationStrategy {
    fn default() -> Self {
        DiversificationStrategy::PathRandomization {
            slowdown: PATH_RANDOMIZATION_SLOWDOWN,
        }
    }
}

impl DiversificationStrategy {
    pub fn slowdown(&self) -> f64 {
        match *self {
            DiversificationStrategy::PathRandomization { slowdown } | DiversificationStrategy::CanaryRekey { slowdown } => {
                slowdown
            }
            DiversificationStrategy::Disabled => 1.0,
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self, DiversificationStrategy::Disabled)
    }

    pub fn validate(&self) -> Result<(), String> {
        let s = self.slowdown();
        if !(s >= 1.0 && s.is_finite()) {
            return Err(format!("diversification slowdown must be >= 1, got {s}"));
        }
        Ok(())
    }
}

/// Start a new epoch: bump the epoch id and, unless disabled, draw a fresh
/// secret and apply the strategy's slowdown.
pub fn diversify(strategy: &DiversificationStrategy, state: &mut ControllerState, rng: &mut RngStream) {
    state.bump_epoch();
    if strategy.is_active() {
        let secret = rng.next_secret();
        state.set_diversity(secret, strategy.slowdown());
    } else {
        let secret = state.secret();
        state.set_diversity(secret, 1.0);
    }
}
