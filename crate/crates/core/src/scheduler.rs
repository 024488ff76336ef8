//! Reset operation modes and the reset-interval safety calculus.
//!
//! A reset interval `T_R` decomposes into downtime `d_R` (no output while the
//! controller reboots or restores), stabilization `d_S` (observing the plant
//! before the first valid output) and stable-state time `d_SS`. Resets are
//! safe when `T_R >= d_R + d_S + d_SS`; the ratio `D = d_SS / (d_R + d_S)`
//! measures how much of each interval the controller spends in control.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::steps_ceil;
use crate::rng::RngStream;

/// Absolute slack on the safety inequality so that decimal inputs which sum
/// to exactly `T_R` are not rejected by binary rounding.
const SAFETY_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error("recovery ratio undefined: d_R + d_S = 0")]
    Degenerate,
    #[error("invalid reset mode: {0}")]
    InvalidMode(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    /// `T_R`
    pub interval: f64,
    /// `d_R`
    pub downtime: f64,
    /// `d_S`
    pub stabilization: f64,
    /// `d_SS`
    pub stable: f64,
}

impl SafetyParams {
    /// Fill `d_SS` with whatever is left of the interval.
    pub fn from_interval(interval: f64, downtime: f64, stabilization: f64) -> Self {
        Self {
            interval,
            downtime,
            stabilization,
            stable: (interval - downtime - stabilization).max(0.0),
        }
    }

    pub fn is_safe(&self) -> bool {
        safety_condition(self.interval, self.downtime, self.stabilization, self.stable)
    }
}

/// `D = d_SS / (d_R + d_S)`.
pub fn recovery_ratio(p: &SafetyParams) -> Result<f64, SchedulerError> {
    let recovery = p.downtime + p.stabilization;
    if recovery <= 0.0 {
        return Err(SchedulerError::Degenerate);
    }
    Ok(p.stable / recovery)
}

/// True iff `T_R >= d_R + d_S + d_SS`.
pub fn safety_condition(interval: f64, downtime: f64, stabilization: f64, stable: f64) -> bool {
    interval + SAFETY_EPS >= downtime + stabilization + stable
}

/// How resets are spaced in time.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResetMode {
    /// Fixed interval.
    Periodic { interval: f64 },
    /// Interval drawn uniformly from `[low, high]` at every reset.
    Random { low: f64, high: f64 },
    /// Two-level policy: `max` while the windowed disturbance metric exceeds
    /// `threshold`, `min` otherwise.
    Adaptive {
        min: f64,
        max: f64,
        window: f64,
        threshold: f64,
    },
}

impl ResetMode {
    pub fn validate(&self) -> Result<(), SchedulerError> {
        let bad = |m: &str| Err(SchedulerError::InvalidMode(m.to_string()));
        match *self {
            ResetMode::Periodic { interval } if !(interval > 0.0 && interval.is_finite()) => {
                bad("periodic interval must be > 0")
            }
            ResetMode::Random { low, high } if !(low > 0.0 && low <= high && high.is_finite()) => {
                bad("random mode needs 0 < low <= high")
            }
            ResetMode::Adaptive { min, max, window, threshold } => {
                if !(min > 0.0 && min <= max && max.is_finite()) {
                    bad("adaptive mode needs 0 < min <= max")
                } else if !(window > 0.0 && window.is_finite()) {
                    bad("adaptive window must be > 0")
                } else if !threshold.is_finite() {
                    bad("adaptive threshold must be finite")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Shortest interval this mode can produce.
    pub fn min_interval(&self) -> f64 {
        match *self {
            ResetMode::Periodic { interval } => interval,
            ResetMode::Random { low, .. } => low,
            ResetMode::Adaptive { min, .. } => min,
        }
    }

    /// Longest interval this mode can produce.
    pub fn max_interval(&self) -> f64 {
        match *self {
            ResetMode::Periodic { interval } => interval,
            ResetMode::Random { high, .. } => high,
            ResetMode::Adaptive { max, .. } => max,
        }
    }
}

/// Bang-bang interval policy: disturbed plants are reset less often.
/// A metric equal to the threshold counts as calm.
pub fn adaptive_update(recent_metric: f64, threshold: f64, min: f64, max: f64) -> f64 {
    if recent_metric > threshold {
        max
    } else {
        min
    }
}

/// Length of the interval starting at a reset, drawing from `rng` for Random.
pub fn next_interval(mode: &ResetMode, rng: &mut RngStream, metric: f64) -> f64 {
    match *mode {
        ResetMode::Periodic { interval } => interval,
        ResetMode::Random { low, high } => rng.uniform_range(low, high),
        ResetMode::Adaptive { min, max, threshold, .. } => adaptive_update(metric, threshold, min, max),
    }
}

/// Absolute time of the next reset after the one at `last_reset`.
pub fn next_reset_time(mode: &ResetMode, now: f64, last_reset: f64, rng: &mut RngStream, metric: f64) -> f64 {
    debug_assert!(now >= last_reset);
    last_reset + next_interval(mode, rng, metric)
}

/// Trailing window of disturbance samples; the metric is the pooled
/// standard deviation across channels.
#[derive(Clone, Debug)]
pub struct MetricWindow {
    capacity: usize,
    samples: VecDeque<[f64; 3]>,
}

impl MetricWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            samples: VecDeque::with_capacity(capacity.max(1)),
        }
    }

    pub fn push(&mut self, sample: [f64; 3]) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Zero until at least two samples are present.
    pub fn pooled_std(&self) -> f64 {
        pooled_std(self.samples.iter().copied())
    }
}

/// Pooled standard deviation of three equally-sized channels: the square
/// root of the mean of the per-channel population variances.
pub fn pooled_std(samples: impl Iterator<Item = [f64; 3]> + Clone) -> f64 {
    let mut n = 0usize;
    let mut sum = [0.0; 3];
    for s in samples.clone() {
        n += 1;
        for i in 0..3 {
            sum[i] += s[i];
        }
    }
    if n < 2 {
        return 0.0;
    }
    let mean = sum.map(|v| v / n as f64);
    let mut ss = 0.0;
    for s in samples {
        for i in 0..3 {
            let d = s[i] - mean[i];
            ss += d * d;
        }
    }
    (ss / (3.0 * n as f64)).sqrt()
}

/// Decision taken at a reset instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResetDecision {
    pub interval: f64,
    pub metric: f64,
}

/// Stateful driver of a [`ResetMode`] on the step grid. The first reset
/// fires at step 0 (the power-on boot); every later one is placed
/// `steps_ceil(interval)` steps after its predecessor.
#[derive(Clone, Debug)]
pub struct ResetScheduler {
    mode: ResetMode,
    dt: f64,
    next_fire: u64,
    last_fire: Option<u64>,
    window: Option<MetricWindow>,
    last_decision: Option<ResetDecision>,
}

impl ResetScheduler {
    pub fn new(mode: ResetMode, dt: f64) -> Self {
        let window = match mode {
            ResetMode::Adaptive { window, .. } => Some(MetricWindow::new(steps_ceil(window, dt) as usize)),
            _ => None,
        };
        Self {
            mode,
            dt,
            next_fire: 0,
            last_fire: None,
            window,
            last_decision: None,
        }
    }

    pub fn mode(&self) -> &ResetMode {
        &self.mode
    }

    /// Step index of the upcoming reset.
    pub fn next_fire_step(&self) -> u64 {
        self.next_fire
    }

    pub fn last_decision(&self) -> Option<ResetDecision> {
        self.last_decision
    }

    /// Called once per step before anything else. Returns the decision when a
    /// reset fires on `step`.
    pub fn poll(&mut self, step: u64, rng: &mut RngStream) -> Option<ResetDecision> {
        if step < self.next_fire {
            return None;
        }
        let metric = self.window.as_ref().map_or(0.0, MetricWindow::pooled_std);
        let interval = next_interval(&self.mode, rng, metric);
        let steps = steps_ceil(interval, self.dt).max(1);
        self.last_fire = Some(step);
        self.next_fire = step + steps;
        let decision = ResetDecision { interval, metric };
        self.last_decision = Some(decision);
        Some(decision)
    }

    /// Feed one disturbance sample; ignored by non-adaptive modes.
    pub fn observe(&mut self, sample: [f64; 3]) {
        if let Some(w) = self.window.as_mut() {
            w.push(sample);
        }
    }

    /// Current windowed metric (adaptive mode only).
    pub fn metric(&self) -> Option<f64> {
        self.window.as_ref().map(MetricWindow::pooled_std)
    }
}

/// Reset instants plus the downtime that follows each, over a horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ResetSchedule {
    pub reset_times: Vec<f64>,
    pub downtime: f64,
    pub horizon: f64,
}

impl ResetSchedule {
    /// Resets at `0, T_R, 2 T_R, ...` strictly before `horizon`.
    pub fn periodic(interval: f64, downtime: f64, horizon: f64) -> Self {
        let mut reset_times = Vec::new();
        let mut k = 0u64;
        loop {
            let t = k as f64 * interval;
            if t >= horizon {
                break;
            }
            reset_times.push(t);
            k += 1;
        }
        Self { reset_times, downtime, horizon }
    }

    /// No resets at all.
    pub fn none(horizon: f64) -> Self {
        Self {
            reset_times: Vec::new(),
            downtime: 0.0,
            horizon,
        }
    }

    /// Lengths of the intervals during which the controller is up: before
    /// the first reset, and from the end of each downtime to the next reset
    /// (or the horizon).
    pub fn uptime_windows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.reset_times.len() + 1);
        let first = self.reset_times.first().copied().unwrap_or(self.horizon);
        if first > 0.0 {
            out.push(first.min(self.horizon));
        }
        for (i, &t) in self.reset_times.iter().enumerate() {
            let end = self.reset_times.get(i + 1).copied().unwrap_or(self.horizon).min(self.horizon);
            out.push((end - (t + self.downtime)).max(0.0));
        }
        out
    }

    pub fn max_uptime_window(&self) -> f64 {
        self.uptime_windows().into_iter().fold(0.0, f64::max)
    }
}
