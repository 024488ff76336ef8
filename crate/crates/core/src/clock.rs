use serde::{Deserialize, Serialize};

/// Default integration step: 0.5 ms.
pub const DEFAULT_DT: f64 = 0.0005;
/// Largest accepted step; must resolve a 3 ms snapshot restore.
pub const MAX_DT: f64 = 0.001;

/// Relative slack used when converting durations to whole steps.
const STEP_EPS: f64 = 1e-6;

/// Fixed-step simulation clock. Time is `step * dt`, never accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    step: u64,
    dt: f64,
}

impl SimClock {
    pub fn new(dt: f64) -> Option<Self> {
        (dt > 0.0 && dt <= MAX_DT && dt.is_finite()).then_some(Self { step: 0, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn now(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn advance(&mut self) {
        self.step += 1;
    }
}

/// Number of whole steps needed to cover `duration`. Values within a
/// rounding error of an integer count snap to it instead of rounding up.
pub fn steps_ceil(duration: f64, dt: f64) -> u64 {
    if duration <= 0.0 {
        return 0;
    }
    let x = duration / dt;
    let r = x.round();
    if (x - r).abs() <= STEP_EPS * r.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_bounds() {
        assert!(SimClock::new(DEFAULT_DT).is_some());
        assert!(SimClock::new(0.001).is_some());
        assert!(SimClock::new(0.0011).is_none());
        assert!(SimClock::new(0.0).is_none());
        assert!(SimClock::new(f64::NAN).is_none());
    }

    #[test]
    fn time_is_exact_multiple_of_dt() {
        let mut c = SimClock::new(DEFAULT_DT).unwrap();
        for _ in 0..20_000 {
            c.advance();
        }
        assert_eq!(c.step(), 20_000);
        assert_eq!(c.now(), 20_000.0 * DEFAULT_DT);
    }

    #[test]
    fn step_conversion_snaps_float_noise() {
        assert_eq!(steps_ceil(0.003, DEFAULT_DT), 6);
        assert_eq!(steps_ceil(0.020, DEFAULT_DT), 40);
        assert_eq!(steps_ceil(0.210, DEFAULT_DT), 420);
        assert_eq!(steps_ceil(0.0031, DEFAULT_DT), 7);
        assert_eq!(steps_ceil(0.0, DEFAULT_DT), 0);
        assert_eq!(steps_ceil(1.0 / 3.0, DEFAULT_DT), 667);
    }
}
