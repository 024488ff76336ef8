//! Run configuration: a versioned JSON document describing one scenario.

use std::collections::BTreeMap;

use resetsim_core::clock::DEFAULT_DT;
use resetsim_core::controller::{ControllerConfig, ControllerError, FlashConfig, ResetStrategyConfig};
use resetsim_core::plants::{PlantConfig, PlantKind};
use resetsim_core::scheduler::ResetMode;
use resetsim_core::security::{AttackerModel, DiversificationStrategy};
use resetsim_core::sim::{Scenario, SimError};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level keys that must be present in every run config.
pub const REQUIRED_KEYS: [&str; 5] = ["schema_version", "plant", "scheduler", "horizon", "seed"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("range violation: {0}")]
    Range(String),
}

/// Controller settings layered over the per-plant defaults. `downtime`
/// replaces the downtime of whichever reset strategy is in effect.
#[derive(JsonSchema, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<ResetStrategyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downtime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_latency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ram_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flash: Option<FlashConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persisted: Option<BTreeMap<String, f64>>,
}

impl ControllerOverrides {
    pub fn resolve(&self, kind: PlantKind) -> ControllerConfig {
        let mut c = ControllerConfig::for_plant(kind);
        if let Some(r) = &self.reset {
            c.reset = r.clone();
        }
        if let Some(d) = self.downtime {
            c.reset = match c.reset {
                ResetStrategyConfig::PowerCycle { .. } => ResetStrategyConfig::PowerCycle { downtime: d },
                ResetStrategyConfig::SnapshotRestore { .. } => ResetStrategyConfig::SnapshotRestore { downtime: d },
            };
        }
        if let Some(v) = self.nominal_latency {
            c.nominal_latency = v;
        }
        if let Some(v) = self.control_period {
            c.control_period = v;
        }
        if let Some(v) = self.ram_size {
            c.ram_size = v;
        }
        if let Some(v) = &self.flash {
            c.flash = v.clone();
        }
        if let Some(v) = &self.persisted {
            c.persisted = v.clone();
        }
        c
    }
}

#[derive(JsonSchema, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub plant: PlantConfig,
    #[serde(default)]
    pub controller: ControllerOverrides,
    /// `null` for the no-reset baseline.
    pub scheduler: Option<ResetMode>,
    #[serde(default)]
    pub diversification: DiversificationStrategy,
    #[serde(default)]
    pub attacker: Option<AttackerModel>,
    /// s
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub seed: u64,
    /// Initial span excluded from plant metrics, s. Defaults per plant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl RunConfig {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            plant: self.plant.clone(),
            controller: self.controller.resolve(self.plant.kind()),
            scheduler: self.scheduler.clone(),
            diversification: self.diversification.clone(),
            attacker: self.attacker.clone(),
            horizon: self.horizon,
            dt: self.dt,
            seed: self.seed,
        }
    }

    pub fn warmup(&self) -> f64 {
        self.warmup.unwrap_or(match self.plant.kind() {
            PlantKind::Engine => 2.0,
            PlantKind::Quad => 1.0,
            PlantKind::Brake => 0.0,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if let Some(w) = self.warmup {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(ConfigError::Range(format!("warmup: must be >= 0, got {w}")));
            }
        }
        self.scenario().validate().map_err(|e| match e {
            SimError::InvalidScenario(m) => ConfigError::Range(m),
            SimError::Controller(ControllerError::DeadlineViolation { latency, period }) => ConfigError::Range(format!(
                "controller latency {latency} s with diversification exceeds control_period {period} s"
            )),
            other => ConfigError::Range(other.to_string()),
        })
    }
}

/// Parse and validate a run config from JSON text.
pub fn parse_config(document: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(document).map_err(|e| ConfigError::Schema(format!("not valid JSON: {e}")))?;
    config_from_value(value)
}

pub fn config_from_value(value: Value) -> Result<RunConfig, ConfigError> {
    let Value::Object(map) = &value else {
        return Err(ConfigError::Schema(format!(
            "expected a JSON object with keys {}",
            REQUIRED_KEYS.join(", ")
        )));
    };
    let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !map.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(ConfigError::Schema(format!("missing required keys: {}", missing.join(", "))));
    }
    let config: RunConfig = serde_json::from_value(value).map_err(|e| ConfigError::Schema(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn to_json(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}
