//! Monte-Carlo attack campaigns over whole scenarios.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
use crate::security::analytic::wilson_interval;
use crate::security::attacker::AttackOutcome;
use crate::sim::{run_until_attack, Scenario, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// 95% Wilson interval on the success rate.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean success time over successful trials, s.
    pub mean_success_time: Option<f64>,
    pub outcomes: Vec<AttackOutcome>,
}

/// Seed used by trial `trial` of a campaign drawn from `rng`.
pub fn trial_seed(rng: &RngStream, trial: u64) -> u64 {
    rng.split(trial).seed()
}

/// One trial: the scenario with its seed replaced by `seed`. Stops as soon
/// as the attacker succeeds.
pub fn run_attack_trial(scenario: &Scenario, seed: u64) -> Result<AttackOutcome, SimError> {
    if scenario.attacker.is_none() {
        return Err(SimError::InvalidScenario("attack campaign needs an attacker".into()));
    }
    let s = Scenario { seed, ..scenario.clone() };
    Ok(run_until_attack(&s)?.expect("attacker present"))
}

/// Run `trials` independent trials serially.
pub fn simulate_attack_campaign(scenario: &Scenario, trials: u64, rng: &RngStream) -> Result<CampaignResult, SimError> {
    let outcomes = (0..trials)
        .map(|i| run_attack_trial(scenario, trial_seed(rng, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(outcomes))
}

pub fn summarize(outcomes: Vec<AttackOutcome>) -> CampaignResult {
    let trials = outcomes.len() as u64;
    let times: Vec<f64> = outcomes.iter().filter_map(|o| o.success_time).collect();
    let successes = outcomes.iter().filter(|o| o.succeeded).count() as u64;
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    CampaignResult {
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        ci_low,
        ci_high,
        mean_success_time: if times.is_empty() {
            None
        } else {
            Some(times.iter().sum::<f64>() / times.len() as f64)
        },
        outcomes,
    }
}
