// SPDX-License-Identifier: Apache-2.0

//! Classical-gravity trajectories of the superposition angle.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use super::equation::{
    acceleration_unchecked, potential_unchecked, small_angle_crossing_time, GuardBand,
    SMALL_ANGLE_VALIDITY,
};
use super::integrator::{Dopri5, Step, StepperOptions};
use crate::error::{Error, Result};
use crate::units::{Angle, Time};

/// Rescaled-time horizon after which a threshold search gives up.
pub const THRESHOLD_HORIZON: f64 = 1e6;

const MAX_STEPS: usize = 5_000_000;
const MIN_STEP_FRACTION: f64 = 1e-14;

/// Where output samples are placed in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// `count` evenly spaced points including `t = 0` and the duration.
    Linear { count: usize },
    /// `t = 0` followed by `count − 1` log-spaced points from
    /// `start_fraction · duration` to the duration.
    Logarithmic { count: usize, start_fraction: f64 },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Logarithmic {
            count: 241,
            start_fraction: 1e-4,
        }
    }
}

impl Sampling {
    fn times(&self, duration: f64) -> Result<Vec<f64>> {
        match *self {
            Sampling::Linear { count } => {
                if count < 2 {
                    return Err(Error::domain("linear sampling needs at least 2 points"));
                }
                let n = (count - 1) as f64;
                Ok((0..count)
                    .map(|k| {
                        if k == count - 1 {
                            duration
                        } else {
                            duration * k as f64 / n
                        }
                    })
                    .collect())
            }
            Sampling::Logarithmic {
                count,
                start_fraction,
            } => {
                if count < 3 {
                    return Err(Error::domain(
                        "logarithmic sampling needs at least 3 points",
                    ));
                }
                if !(start_fraction > 0.0 && start_fraction < 1.0) {
                    return Err(Error::domain(
                        "logarithmic start fraction must be in (0, 1)",
                    ));
                }
                let decades = -start_fraction.log10();
                let n = (count - 2) as f64;
                let mut times = vec![0.0];
                times.extend((0..count - 1).map(|k| {
                    if k == count - 2 {
                        duration
                    } else {
                        duration * 10f64.powf(-decades * (1.0 - k as f64 / n))
                    }
                }));
                Ok(times)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsConfig {
    pub theta0: Angle,
    /// Initial angular velocity in rad per rescaled-time unit.
    pub initial_angular_velocity: f64,
    /// Relative error tolerance of the adaptive integrator.
    pub tolerance: f64,
    /// Largest rescaled step; `None` uses 1/64 of the integration span.
    pub max_step: Option<f64>,
    pub guard: GuardBand,
    pub sampling: Sampling,
}

impl DynamicsConfig {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(theta0: Angle) -> Self {
        DynamicsConfig {
            theta0,
            initial_angular_velocity: 0.0,
            tolerance: Self::DEFAULT_TOLERANCE,
            max_step: None,
            guard: GuardBand::default(),
            sampling: Sampling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let GuardBand { floor, ceiling } = self.guard;
        let theta0 = self.theta0.si();
        if !(0.0 < floor && floor < theta0 && theta0 < ceiling && ceiling < PI) {
            return Err(Error::domain(format!(
                "need 0 < floor ({floor:e}) < θ0 ({theta0:e}) < ceiling ({ceiling}) < π"
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("integrator tolerance must be positive"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::domain("max step must be positive"));
            }
        }
        if !self.initial_angular_velocity.is_finite() {
            return Err(Error::domain("initial angular velocity must be finite"));
        }
        Ok(())
    }

    fn stepper_options(&self, span: f64, initial_step: f64) -> StepperOptions {
        StepperOptions {
            relative_tolerance: self.tolerance,
            absolute_tolerance: 1e-300,
            max_step: self.max_step.unwrap_or(span / 64.0),
            initial_step,
            min_step_fraction: MIN_STEP_FRACTION,
        }
    }

    fn stepper(
        &self,
        options: StepperOptions,
    ) -> Dopri5<impl FnMut(f64, &[f64; 2]) -> [f64; 2], 2> {
        let theta0 = self.theta0.si();
        Dopri5::new(
            move |_s, y: &[f64; 2]| [y[1], acceleration_unchecked(theta0 + y[0])],
            0.0,
            [0.0, self.initial_angular_velocity],
            options,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    FloorHit,
    CeilingHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    /// Physical time, s; always `tau · s`.
    pub t: f64,
    /// Rescaled time.
    pub s: f64,
    pub theta: f64,
    /// rad per rescaled-time unit.
    pub theta_dot: f64,
    /// Signed `θ − θ0`, integrated directly.
    pub offset: f64,
    /// `|θ − θ0|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub theta0: f64,
    pub tau: f64,
    pub terminated_by: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub samples: Vec<TrajectorySample>,
}

/// Quintic Hermite interpolation of `(offset, θ')` inside one step, from the
/// offset, velocity and acceleration at both ends.
fn interpolate(step: &Step<2>, s: f64) -> (f64, f64) {
    let h = step.s1 - step.s0;
    if h == 0.0 {
        return (step.y1[0], step.y1[1]);
    }
    let x = ((s - step.s0) / h).clamp(0.0, 1.0);
    let (x2, x3) = (x * x, x * x * x);
    let (x4, x5) = (x3 * x, x3 * x2);

    let p0 = step.y0[0];
    let v0 = step.y0[1] * h;
    let a0 = step.f0[1] * h * h;
    let p1 = step.y1[0];
    let v1 = step.y1[1] * h;
    let a1 = step.f1[1] * h * h;

    let h0 = 1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5;
    let h1 = x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5;
    let h2 = 0.5 * x2 - 1.5 * x3 + 1.5 * x4 - 0.5 * x5;
    let h3 = 0.5 * x3 - x4 + 0.5 * x5;
    let h4 = -4.0 * x3 + 7.0 * x4 - 3.0 * x5;
    let h5 = 10.0 * x3 - 15.0 * x4 + 6.0 * x5;
    let pos = p0 * h0 + v0 * h1 + a0 * h2 + a1 * h3 + v1 * h4 + p1 * h5;

    let d0 = -30.0 * x2 + 60.0 * x3 - 30.0 * x4;
    let d1 = 1.0 - 18.0 * x2 + 32.0 * x3 - 15.0 * x4;
    let d2 = x - 4.5 * x2 + 6.0 * x3 - 2.5 * x4;
    let d3 = 1.5 * x2 - 4.0 * x3 + 2.5 * x4;
    let d4 = -12.0 * x2 + 28.0 * x3 - 15.0 * x4;
    let d5 = 30.0 * x2 - 60.0 * x3 + 30.0 * x4;
    let vel = (p0 * d0 + v0 * d1 + a0 * d2 + a1 * d3 + v1 * d4 + p1 * d5) / h;

    (pos, vel)
}

/// Finds `s` in the step where `g(offset(s))` changes sign, assuming
/// `g < 0` at the step start and `g ≥ 0` at its end.
fn bisect(step: &Step<2>, mut g: impl FnMut(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (step.s0, step.s1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(interpolate(step, mid).0) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn sample(tau: f64, theta0: f64, s: f64, offset: f64, theta_dot: f64) -> TrajectorySample {
    TrajectorySample {
        t: tau * s,
        s,
        theta: theta0 + offset,
        theta_dot,
        offset,
        deviation: offset.abs(),
    }
}

/// Integrates the rescaled equation of motion from `θ0` over `duration`.
pub fn integrate(config: &DynamicsConfig, tau: Time, duration: Time) -> Result<Trajectory> {
    config.validate()?;
    let (tau, duration) = (tau.si(), duration.si());
    if !(tau > 0.0) || !(duration > 0.0) {
        return Err(Error::domain(
            "integration needs τ > 0 and a positive duration",
        ));
    }
    let theta0 = config.theta0.si();
    let s_end = duration / tau;
    let sample_s: Vec<f64> = config
        .sampling
        .times(duration)?
        .into_iter()
        .map(|t| t / tau)
        .collect();

    let span = s_end;
    let options = config.stepper_options(
        span,
        (span * 1e-3).min(config.max_step.unwrap_or(f64::INFINITY)),
    );
    let mut stepper = config.stepper(options);

    let mut samples = vec![sample(
        tau,
        theta0,
        0.0,
        0.0,
        config.initial_angular_velocity,
    )];
    let mut next = 1;
    let mut terminated_by = Termination::TimeLimit;

    while stepper.time() < s_end {
        if stepper.accepted_steps() >= MAX_STEPS {
            return Err(Error::StepUnderflow {
                state: crate::error::IntegratorState {
                    s: stepper.time(),
                    offset: stepper.state()[0],
                    theta_dot: stepper.state()[1],
                },
                reason: format!("exceeded {MAX_STEPS} steps"),
            });
        }
        let step = stepper.step(s_end)?;
        let theta_end = theta0 + step.y1[0];
        let crossing = if theta_end < config.guard.floor {
            Some((
                Termination::FloorHit,
                bisect(&step, |o| config.guard.floor - (theta0 + o)),
            ))
        } else if theta_end > config.guard.ceiling {
            Some((
                Termination::CeilingHit,
                bisect(&step, |o| theta0 + o - config.guard.ceiling),
            ))
        } else {
            None
        };
        let step_end = crossing.map_or(step.s1, |(_, s)| s);

        while next < sample_s.len() && sample_s[next] <= step_end {
            let s = if next == sample_s.len() - 1 && crossing.is_none() {
                step.s1
            } else {
                sample_s[next]
            };
            let (offset, vel) = if s == step.s1 {
                (step.y1[0], step.y1[1])
            } else {
                interpolate(&step, s)
            };
            samples.push(sample(tau, theta0, s, offset, vel));
            next += 1;
        }

        if let Some((why, s)) = crossing {
            if samples.last().is_some_and(|last| last.s < s) {
                let (offset, vel) = interpolate(&step, s);
                samples.push(sample(tau, theta0, s, offset, vel));
            }
            terminated_by = why;
            break;
        }
    }

    Ok(Trajectory {
        theta0,
        tau,
        terminated_by,
        accepted_steps: stepper.accepted_steps(),
        rejected_steps: stepper.rejected_steps(),
        samples,
    })
}

impl Trajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("a trajectory always holds the initial sample")
    }

    /// First integral at each sample, `θ'²/2 + V(θ)`.
    pub fn energies(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|p| 0.5 * p.theta_dot * p.theta_dot + potential_unchecked(p.theta))
            .collect()
    }

    /// Largest `|E(s) − E(0)| / |E(0)|` over the samples.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let energies = self.energies();
        let e0 = energies[0];
        energies
            .iter()
            .map(|e| (e - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }

    /// The quantum-scenario counterpart: the angle never moves, so the
    /// deviation is zero at every sample time.
    pub fn quantum_baseline(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|p| (p.t, 0.0)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,s_rescaled,theta_rad,deviation_rad\n");
        for p in &self.samples {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", p.t, p.s, p.theta, p.deviation);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }
}

/// Result of a threshold-crossing search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCrossing {
    pub resolution: f64,
    /// Crossing time from integration with bisection on the dense output, s.
    pub time: f64,
    /// `θ0 τ sqrt(Δθ/2)`, s.
    pub closed_form_time: f64,
    /// Whether the constant-acceleration law holds at the crossing.
    pub closed_form_valid: bool,
}

impl ThresholdCrossing {
    pub fn relative_difference(&self) -> f64 {
        (self.time - self.closed_form_time).abs() / self.closed_form_time
    }
}

/// First time at which `|θt − θ0|` reaches `resolution`.
pub fn time_to_threshold(
    config: &DynamicsConfig,
    tau: Time,
    resolution: Angle,
) -> Result<ThresholdCrossing> {
    config.validate()?;
    let res = resolution.si();
    if !(res > 0.0) {
        return Err(Error::domain("resolution must be positive"));
    }
    let tau_s = tau.si();
    if !(tau_s > 0.0) {
        return Err(Error::domain("τ must be positive"));
    }
    let theta0 = config.theta0.si();
    let closed = small_angle_crossing_time(config.theta0, tau, resolution).si();
    let closed_form_valid = res <= SMALL_ANGLE_VALIDITY * theta0;

    let guess = (closed / tau_s).min(THRESHOLD_HORIZON);
    let mut options = config.stepper_options(THRESHOLD_HORIZON, guess * 0.1);
    if config.max_step.is_none() {
        options.max_step = f64::INFINITY;
    }
    let mut stepper = config.stepper(options);

    while stepper.time() < THRESHOLD_HORIZON {
        if stepper.accepted_steps() >= MAX_STEPS {
            break;
        }
        let step = stepper.step(THRESHOLD_HORIZON)?;
        let theta_end = theta0 + step.y1[0];
        let guard_hit = !config.guard.contains(theta_end);
        if step.y1[0].abs() >= res {
            let s = bisect(&step, |o| o.abs() - res);
            let within_guard = config.guard.contains(theta0 + interpolate(&step, s).0);
            if within_guard {
                return Ok(ThresholdCrossing {
                    resolution: res,
                    time: tau_s * s,
                    closed_form_time: closed,
                    closed_form_valid,
                });
            }
        }
        if guard_hit {
            return Err(Error::UnreachableThreshold {
                resolution: res,
                reason: format!("the angle left the guard band at s = {:e}", step.s1),
            });
        }
    }
    Err(Error::UnreachableThreshold {
        resolution: res,
        reason: format!("deviation stayed below it up to s = {:e}", stepper.time()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::characteristic_time;
    use crate::units::{Length, Mass};
    use std::f64::consts::FRAC_PI_2;

    fn nominal_tau() -> Time {
        characteristic_time(Length::new(1e-5), Mass::new(1e-20)).unwrap()
    }

    #[test]
    fn hermite_reproduces_quintics() {
        // p(s) = 1 + 2s − s² + 0.5s³ − 0.25s⁴ + 0.1s⁵
        let p =
            |s: f64| 1.0 + 2.0 * s - s * s + 0.5 * s.powi(3) - 0.25 * s.powi(4) + 0.1 * s.powi(5);
        let dp = |s: f64| 2.0 - 2.0 * s + 1.5 * s * s - s.powi(3) + 0.5 * s.powi(4);
        let ddp = |s: f64| -2.0 + 3.0 * s - 3.0 * s * s + 2.0 * s.powi(3);
        let (a, b) = (0.3, 1.7);
        let step = Step {
            s0: a,
            s1: b,
            y0: [p(a), dp(a)],
            y1: [p(b), dp(b)],
            f0: [dp(a), ddp(a)],
            f1: [dp(b), ddp(b)],
        };
        for k in 0..=10 {
            let s = a + (b - a) * k as f64 / 10.0;
            let (pos, vel) = interpolate(&step, s);
            assert!((pos - p(s)).abs() < 1e-13, "pos at {s}");
            assert!((vel - dp(s)).abs() < 1e-12, "vel at {s}");
        }
    }

    #[test]
    fn sampling_grids() {
        let lin = Sampling::Linear { count: 5 }.times(2.0).unwrap();
        assert_eq!(lin, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let log = Sampling::Logarithmic {
            count: 5,
            start_fraction: 1e-3,
        }
        .times(10.0)
        .unwrap();
        assert_eq!(log[0], 0.0);
        assert_eq!(*log.last().unwrap(), 10.0);
        assert!((log[1] - 1e-2).abs() < 1e-15);
        assert!(log.windows(2).all(|w| w[0] < w[1]));
        assert!(Sampling::Linear { count: 1 }.times(1.0).is_err());
    }

    #[test]
    fn equilibrium_is_held() {
        let config = DynamicsConfig::new(Angle::new(FRAC_PI_2));
        let traj = integrate(&config, Time::new(1.0), Time::new(50.0)).unwrap();
        assert_eq!(traj.terminated_by, Termination::TimeLimit);
        assert!(traj.samples.iter().all(|p| p.deviation <= config.tolerance));
        assert!(traj.samples.iter().all(|p| p.deviation == 0.0));
    }

    #[test]
    fn sample_invariants() {
        let config = DynamicsConfig::new(Angle::new(7.92e-4));
        let tau = nominal_tau();
        let traj = integrate(&config, tau, Time::new(2.5)).unwrap();
        assert_eq!(traj.samples[0].deviation, 0.0);
        assert!(traj.samples.iter().all(|p| p.t == tau.si() * p.s));
        assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(traj.samples.len(), 241);
        assert_eq!(traj.final_sample().s, 2.5 / tau.si());
    }

    #[test]
    fn nominal_deviation_matches_small_angle_law() {
        let config = DynamicsConfig::new(Angle::new(7.92e-4));
        let tau = nominal_tau();
        let traj = integrate(&config, tau, Time::new(2.5)).unwrap();
        let got = traj.final_sample().deviation;
        // 2·(2.5/τ)²/θ0² with τ = 5.4740925536e7 s
        let expected = 6.650_210e-9;
        assert!((got - expected).abs() / expected < 1e-4, "{got:e}");
    }

    #[test]
    fn collapse_hits_the_floor() {
        let config = DynamicsConfig::new(Angle::new(0.5));
        let traj = integrate(&config, Time::new(1.0), Time::new(10.0)).unwrap();
        assert_eq!(traj.terminated_by, Termination::FloorHit);
        let last = traj.final_sample();
        assert!((last.theta - config.guard.floor).abs() < 1e-9);
        assert!(traj.samples.windows(2).all(|w| w[1].theta < w[0].theta));
    }

    #[test]
    fn obtuse_angles_open_up_to_the_ceiling() {
        let config = DynamicsConfig::new(Angle::new(2.5));
        let traj = integrate(&config, Time::new(1.0), Time::new(10.0)).unwrap();
        assert_eq!(traj.terminated_by, Termination::CeilingHit);
    }

    #[test]
    fn invalid_configs() {
        assert!(integrate(
            &DynamicsConfig::new(Angle::new(1e-9)),
            Time::new(1.0),
            Time::new(1.0)
        )
        .is_err());
        let mut c = DynamicsConfig::new(Angle::new(0.1));
        c.tolerance = 0.0;
        assert!(integrate(&c, Time::new(1.0), Time::new(1.0)).is_err());
        let c = DynamicsConfig::new(Angle::new(0.1));
        assert!(integrate(&c, Time::new(1.0), Time::ZERO).is_err());
    }

    #[test]
    fn threshold_examples() {
        let config = DynamicsConfig::new(Angle::new(7.92e-4));
        let tau = Time::new(5.47e7);
        let hit = time_to_threshold(&config, tau, Angle::new(1e-10)).unwrap();
        assert!((hit.closed_form_time - 0.3063).abs() < 1e-3);
        assert!(hit.closed_form_valid);
        assert!(hit.relative_difference() < 1e-3, "{hit:?}");

        let tiny = time_to_threshold(&config, tau, Angle::new(1e-30)).unwrap();
        assert!(tiny.time < 1e-9);

        let stuck = DynamicsConfig::new(Angle::new(FRAC_PI_2));
        assert!(matches!(
            time_to_threshold(&stuck, tau, Angle::new(1e-10)),
            Err(Error::UnreachableThreshold { .. })
        ));
        assert!(matches!(
            time_to_threshold(&config, tau, Angle::new(1.0)),
            Err(Error::UnreachableThreshold { .. })
        ));
        assert!(time_to_threshold(&config, tau, Angle::ZERO).is_err());
    }

    #[test]
    fn csv_layout() {
        let config = DynamicsConfig {
            sampling: Sampling::Linear { count: 3 },
            ..DynamicsConfig::new(Angle::new(0.1))
        };
        let csv = integrate(&config, Time::new(1.0), Time::new(1e-3))
            .unwrap()
            .to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_s,s_rescaled,theta_rad,deviation_rad");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0e0,0e0,1e-1,0e0"));
    }
}
