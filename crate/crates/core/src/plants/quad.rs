//! Quadcopter attitude dynamics: three decoupled rotational axes driven by
//! an X-configuration motor mix, plus a seeded wind-torque field.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadParams {
    /// Roll, pitch, yaw inertia in kg·m².
    pub inertia: [f64; 3],
    /// Torque produced per unit of normalized motor differential, N·m.
    pub torque_authority: [f64; 3],
    /// Attitude-angle feedback gain, N·m/rad.
    pub angle_gain: [f64; 3],
    /// Body-rate feedback gain, N·m·s/rad.
    pub rate_gain: [f64; 3],
    /// Collective command that holds altitude.
    pub hover_thrust: f64,
    /// Estimator (and attitude loop) sample rate.
    pub estimator_rate_hz: f64,
    /// Samples the estimator needs after a reset before control resumes.
    pub estimator_samples: u32,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            inertia: [0.005, 0.005, 0.009],
            torque_authority: [0.5, 0.5, 0.2],
            angle_gain: [0.25, 0.25, 0.2],
            rate_gain: [0.05, 0.05, 0.06],
            hover_thrust: 0.5,
            estimator_rate_hz: 250.0,
            estimator_samples: 50,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<(), String> {
        for i in 0..3 {
            if !(self.inertia[i] > 0.0 && self.torque_authority[i] > 0.0) {
                return Err("quad inertia and torque_authority must be > 0".into());
            }
            if !(self.angle_gain[i] >= 0.0 && self.rate_gain[i] >= 0.0) {
                return Err("quad gains must be >= 0".into());
            }
        }
        if !(0.0..=1.0).contains(&self.hover_thrust) {
            return Err("quad hover_thrust must be in [0, 1]".into());
        }
        if !(self.estimator_rate_hz > 0.0 && self.estimator_rate_hz.is_finite()) {
            return Err("quad estimator_rate_hz must be > 0".into());
        }
        Ok(())
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.estimator_rate_hz
    }
}

/// Motor commands for a collective thrust and per-axis torque demand,
/// saturated to `[0, 1]`.
pub fn mix(params: &QuadParams, thrust: f64, torque: [f64; 3]) -> [f64; 4] {
    let u = [0, 1, 2].map(|i| torque[i] / params.torque_authority[i]);
    let [r, p, y] = u;
    [thrust + r + p - y, thrust - r + p + y, thrust - r - p - y, thrust + r - p + y].map(|m| m.clamp(0.0, 1.0))
}

/// Body torques produced by (saturated) motor commands.
pub fn unmix(params: &QuadParams, motors: [f64; 4]) -> [f64; 3] {
    let [m0, m1, m2, m3] = motors.map(|m| m.clamp(0.0, 1.0));
    let u = [(m0 - m1 - m2 + m3) / 4.0, (m0 + m1 - m2 - m3) / 4.0, (-m0 + m1 - m2 + m3) / 4.0];
    [0, 1, 2].map(|i| u[i] * params.torque_authority[i])
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadState {
    /// Roll, pitch, yaw in rad.
    pub angles: [f64; 3],
    /// Body rates in rad/s.
    pub rates: [f64; 3],
    /// Last motor commands applied, normalized.
    pub motors: [f64; 4],
}

/// Advance attitude by one explicit Euler step.
pub fn quad_step(params: &QuadParams, state: &mut QuadState, motors: [f64; 4], wind_torque: [f64; 3], dt: f64) {
    let motors = motors.map(|m| m.clamp(0.0, 1.0));
    let control = unmix(params, motors);
    for i in 0..3 {
        let accel = (control[i] + wind_torque[i]) / params.inertia[i];
        state.angles[i] += state.rates[i] * dt;
        state.rates[i] += accel * dt;
    }
    state.motors = motors;
}

/// One piece of a piecewise-constant wind profile, active from `start`
/// until the next segment begins.
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSegment {
    pub start: f64,
    /// Mean disturbance torque per axis, N·m.
    #[serde(default)]
    pub mean: [f64; 3],
    /// Stationary standard deviation of the gust component per axis, N·m.
    #[serde(default)]
    pub gust_std: [f64; 3],
    /// Correlation time of the gust process, s.
    #[serde(default = "default_correlation_time")]
    pub correlation_time: f64,
}

fn default_correlation_time() -> f64 {
    0.5
}

#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindProfile {
    #[serde(default)]
    pub segments: Vec<WindSegment>,
}

impl WindProfile {
    pub fn calm() -> Self {
        Self::default()
    }

    pub fn constant(mean: [f64; 3], gust_std: [f64; 3], correlation_time: f64) -> Self {
        Self {
            segments: vec![WindSegment {
                start: 0.0,
                mean,
                gust_std,
                correlation_time,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut last = f64::NEG_INFINITY;
        for s in &self.segments {
            if !(s.start >= 0.0 && s.start > last) {
                return Err("wind segments must start at increasing non-negative times".into());
            }
            if s.correlation_time.is_nan() || s.correlation_time <= 0.0 || s.gust_std.iter().any(|g| *g < 0.0 || !g.is_finite()) {
                return Err("wind gusts need correlation_time > 0 and gust_std >= 0".into());
            }
            last = s.start;
        }
        Ok(())
    }

    fn segment_at(&self, t: f64) -> Option<&WindSegment> {
        self.segments.iter().rev().find(|s| s.start <= t)
    }
}

/// Wind profile plus the running gust state (an Ornstein-Uhlenbeck process
/// per axis, sampled exactly on the step grid).
#[derive(Clone, Debug)]
pub struct WindField {
    profile: WindProfile,
    gust: [f64; 3],
    rng: RngStream,
}

impl WindField {
    pub fn new(profile: WindProfile, rng: RngStream) -> Self {
        Self {
            profile,
            gust: [0.0; 3],
            rng,
        }
    }

    /// Disturbance torque for the step starting at `t`.
    pub fn sample(&mut self, t: f64, dt: f64) -> [f64; 3] {
        let Some(seg) = self.profile.segment_at(t) else {
            return [0.0; 3];
        };
        let (mean, std, tau) = (seg.mean, seg.gust_std, seg.correlation_time);
        let mut out = mean;
        if std.iter().any(|s| *s > 0.0) {
            let a = (-dt / tau).exp();
            let k = (1.0 - a * a).sqrt();
            for i in 0..3 {
                let n: f64 = StandardNormal.sample(&mut self.rng);
                self.gust[i] = a * self.gust[i] + std[i] * k * n;
                out[i] += self.gust[i];
            }
        } else {
            self.gust = [0.0; 3];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const DT: f64 = 0.0005;

    #[test]
    fn zero_input_is_equilibrium() {
        let p = QuadParams::default();
        let mut s = QuadState::default();
        for _ in 0..1000 {
            quad_step(&p, &mut s, [0.0; 4], [0.0; 3], DT);
        }
        assert_eq!(s.angles, [0.0; 3]);
        assert_eq!(s.rates, [0.0; 3]);
    }

    #[test]
    fn constant_torque_ramps_rate() {
        let p = QuadParams::default();
        let tau = 0.01;
        let motors = mix(&p, 0.5, [tau, 0.0, 0.0]);
        let mut s = QuadState::default();
        let n = 400;
        for _ in 0..n {
            quad_step(&p, &mut s, motors, [0.0; 3], DT);
        }
        let t = n as f64 * DT;
        assert_abs_diff_eq!(s.rates[0], tau * t / p.inertia[0], epsilon = 1e-12);
        assert_abs_diff_eq!(s.rates[1], 0.0, epsilon = 1e-15);
        // Explicit Euler angle: sum of previous rates.
        let expected_angle = tau / p.inertia[0] * DT * DT * (n * (n - 1) / 2) as f64;
        assert_abs_diff_eq!(s.angles[0], expected_angle, epsilon = 1e-12);
    }

    #[test]
    fn mix_unmix_round_trip_within_saturation() {
        let p = QuadParams::default();
        let torque = [0.02, -0.03, 0.01];
        let back = unmix(&p, mix(&p, 0.5, torque));
        for i in 0..3 {
            assert_abs_diff_eq!(back[i], torque[i], epsilon = 1e-12);
        }
        let hover = mix(&p, 0.5, [0.0; 3]);
        assert_eq!(hover, [0.5; 4]);
    }

    #[test]
    fn mix_saturates() {
        let p = QuadParams::default();
        let m = mix(&p, 0.9, [10.0, 0.0, 0.0]);
        assert!(m.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn wind_gusts_have_configured_spread() {
        let profile = WindProfile::constant([0.01, 0.0, 0.0], [0.004, 0.004, 0.0], 0.2);
        let mut w = WindField::new(profile, RngStream::new(5));
        let n = 400_000;
        let xs: Vec<[f64; 3]> = (0..n).map(|k| w.sample(k as f64 * DT, DT)).collect();
        let mean = xs.iter().map(|x| x[0]).sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x[0] - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 0.01).abs() < 0.001, "mean {mean}");
        assert!((var.sqrt() - 0.004).abs() < 0.0006, "std {}", var.sqrt());
        assert!(xs.iter().all(|x| x[2] == 0.0));
    }

    #[test]
    fn wind_is_piecewise() {
        let profile = WindProfile {
            segments: vec![
                WindSegment { start: 1.0, mean: [0.02, 0.0, 0.0], gust_std: [0.0; 3], correlation_time: 0.5 },
            ],
        };
        let mut w = WindField::new(profile, RngStream::new(1));
        assert_eq!(w.sample(0.5, DT), [0.0; 3]);
        assert_eq!(w.sample(1.0, DT), [0.02, 0.0, 0.0]);
    }
}
