//! Closed-form attack success probabilities.

use crate::controller::FlashConfig;
use crate::scheduler::ResetSchedule;
use crate::security::attacker::AttackerModel;

/// Attack that needs `collect_time` of uninterrupted work: all or nothing.
/// The boundary is inclusive.
pub fn success_prob_deterministic(t_epoch: f64, collect_time: f64) -> f64 {
    if t_epoch >= collect_time {
        1.0
    } else {
        0.0
    }
}

/// Exhaustive search without replacement: `min(1, rate · t / N)`.
pub fn success_prob_probabilistic(t_epoch: f64, rate: f64, space: u64) -> f64 {
    (rate * t_epoch / space as f64).min(1.0)
}

/// Success probability of `model` given `t` seconds of uninterrupted work.
pub fn per_epoch_success_prob(model: &AttackerModel, t: f64, flash: &FlashConfig) -> f64 {
    match *model {
        AttackerModel::Disclosure { collect_time } => success_prob_deterministic(t, collect_time),
        AttackerModel::Guessing { rate, space } => success_prob_probabilistic(t, rate, space),
        AttackerModel::FlashPersist { .. } => success_prob_deterministic(t, flash.persist_time()),
        AttackerModel::DefeatDevice { accumulation_time } => success_prob_deterministic(t, accumulation_time),
    }
}

/// Probability that the attacker succeeds within `epochs` epochs of
/// `uptime` seconds each, using the default flash timings.
///
/// With diversification every epoch is an independent try,
/// `1 − (1 − p(u))^k`. Without it, secret-bound progress carries over and
/// the attacker effectively gets `p(k·u)`. Flash writes and defeat-device
/// accumulators are cut by every reset regardless, so for those models the
/// answer is `p(u)` either way.
pub fn campaign_success_prob(uptime: f64, epochs: u64, model: &AttackerModel, diversified: bool) -> f64 {
    campaign_success_prob_with_flash(uptime, epochs, model, diversified, &FlashConfig::default())
}

pub fn campaign_success_prob_with_flash(
    uptime: f64,
    epochs: u64,
    model: &AttackerModel,
    diversified: bool,
    flash: &FlashConfig,
) -> f64 {
    let k = epochs.max(1);
    match model {
        AttackerModel::FlashPersist { .. } | AttackerModel::DefeatDevice { .. } => {
            per_epoch_success_prob(model, uptime, flash)
        }
        _ if diversified => {
            let p = per_epoch_success_prob(model, uptime, flash);
            1.0 - (1.0 - p).powf(k as f64)
        }
        _ => per_epoch_success_prob(model, k as f64 * uptime, flash),
    }
}

/// Whether a defeat device that needs `accumulation_time` of uninterrupted
/// observation ever completes under `schedule` before `horizon`.
pub fn defeat_device_triggered(schedule: &ResetSchedule, accumulation_time: f64, horizon: f64) -> bool {
    let clipped = ResetSchedule {
        horizon: horizon.min(schedule.horizon),
        ..schedule.clone()
    };
    clipped.max_uptime_window() >= accumulation_time
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
