//! Attack campaigns driven from a run config.

use rayon::prelude::*;
use resetsim_core::rng::RngStream;
use resetsim_core::scheduler::ResetMode;
use resetsim_core::security::analytic::campaign_success_prob_with_flash;
use resetsim_core::security::campaign::{run_attack_trial, summarize, trial_seed};
use resetsim_core::security::CampaignResult;
use resetsim_core::sim::SimError;

use crate::config::RunConfig;
use crate::table::{fmt_num, fmt_opt, CsvTable};

/// Closed-form prediction for a periodic schedule (or none): per-epoch
/// uptime, epoch count and campaign success probability.
pub fn analytic_prediction(config: &RunConfig) -> Option<(f64, u64, f64)> {
    let scenario = config.scenario();
    let model = config.attacker.as_ref()?;
    let (uptime, epochs) = match config.scheduler {
        None => (config.horizon, 1),
        Some(ResetMode::Periodic { interval }) => {
            let k = (config.horizon / interval - 1e-9).ceil().max(1.0) as u64;
            (interval - scenario.downtime(), k)
        }
        Some(_) => return None,
    };
    let p = campaign_success_prob_with_flash(
        uptime,
        epochs,
        model,
        config.diversification.is_active(),
        &scenario.controller.flash,
    );
    Some((uptime, epochs, p))
}

/// Run `trials` trials. Trial `i` uses seed `split(config seed)(i)`; the
/// result does not depend on `parallel`.
pub fn run_campaign(config: &RunConfig, trials: u64, parallel: bool) -> Result<CampaignResult, SimError> {
    let scenario = config.scenario();
    let rng = RngStream::new(config.seed);
    let run = |i: u64| run_attack_trial(&scenario, trial_seed(&rng, i));
    let outcomes = if parallel {
        (0..trials).into_par_iter().map(run).collect::<Result<Vec<_>, _>>()?
    } else {
        (0..trials).map(run).collect::<Result<Vec<_>, _>>()?
    };
    Ok(summarize(outcomes))
}

pub fn summary_table(config: &RunConfig, result: &CampaignResult) -> CsvTable {
    let header = [
        "attacker",
        "diversified",
        "trials",
        "successes",
        "success_rate",
        "ci_low",
        "ci_high",
        "mean_success_time",
        "uptime",
        "epochs",
        "analytic_prob",
    ];
    let mut t = CsvTable::new(header.iter().map(|s| s.to_string()).collect());
    let analytic = analytic_prediction(config);
    t.rows.push(vec![
        config.attacker.as_ref().map_or("", |a| a.name()).to_owned(),
        (config.diversification.is_active() as u8).to_string(),
        result.trials.to_string(),
        result.successes.to_string(),
        fmt_num(result.success_rate),
        fmt_num(result.ci_low),
        fmt_num(result.ci_high),
        fmt_opt(result.mean_success_time),
        fmt_opt(analytic.map(|a| a.0)),
        analytic.map(|a| a.1.to_string()).unwrap_or_default(),
        fmt_opt(analytic.map(|a| a.2)),
    ]);
    t
}

pub fn trials_table(config: &RunConfig, result: &CampaignResult) -> CsvTable {
    let header = ["trial", "seed", "succeeded", "success_time", "epochs_survived"];
    let mut t = CsvTable::new(header.iter().map(|s| s.to_string()).collect());
    let rng = RngStream::new(config.seed);
    for (i, o) in result.outcomes.iter().enumerate() {
        t.rows.push(vec![
            i.to_string(),
            trial_seed(&rng, i as u64).to_string(),
            (o.succeeded as u8).to_string(),
            fmt_opt(o.success_time),
            o.epochs_survived.to_string(),
        ]);
    }
    t
}
