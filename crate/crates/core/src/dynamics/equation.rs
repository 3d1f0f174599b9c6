// SPDX-License-Identifier: Apache-2.0

//! The rescaled equation of motion for the superposition angle.
//!
//! With `s = t/τ` and `τ = sqrt(2L³/(G m))` the classical-gravity dynamics of
//! the angle between the two branches is parameter free:
//!
//! ```text
//! θ'' = −(cos³(θ/2) − sin³(θ/2)) / (cos²(θ/2) sin²(θ/2))
//! ```
//!
//! The sign makes branches closer than π/2 attract each other.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::constants::GRAVITATIONAL_CONSTANT;
use crate::error::{Error, Result};
use crate::units::{Angle, Length, Mass, Time};

/// Characteristic time `τ = sqrt((1/2)·4L³/(G m))`.
pub fn characteristic_time(half_length: Length, mass: Mass) -> Result<Time> {
    let (l, m) = (half_length.si(), mass.si());
    if !(l > 0.0) || !(m > 0.0) {
        return Err(Error::domain(format!(
            "characteristic time needs positive L and m, got L = {l:e} m, m = {m:e} kg"
        )));
    }
    Ok(Time::new(
        (0.5 * 4.0 * l.powi(3) / (GRAVITATIONAL_CONSTANT * m)).sqrt(),
    ))
}

/// Angles outside which the Newtonian point-mass model is not evaluated.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GuardBand {
    pub floor: f64,
    pub ceiling: f64,
}

impl Default for GuardBand {
    fn default() -> Self {
        GuardBand {
            floor: 1e-8,
            ceiling: PI - 1e-8,
        }
    }
}

impl GuardBand {
    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.floor && theta <= self.ceiling
    }

    pub(crate) fn check(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::singularity(format!(
                "angle {theta:e} rad is outside the guard band [{:e}, {:e}]",
                self.floor, self.ceiling
            )))
        }
    }
}

/// Signed angular acceleration in rescaled units, without the guard check.
///
/// Evaluated as `4√2 sin((θ−π/2)/2)(1 + sin θ / 2) / sin²θ`, an exact
/// rewrite of the half-angle form in which the numerator vanishes exactly at
/// `θ = π/2` and the expression is odd about `π/2`.
pub(crate) fn acceleration_unchecked(theta: f64) -> f64 {
    let sin = theta.sin();
    4.0 * SQRT_2 * (0.5 * (theta - FRAC_PI_2)).sin() * (1.0 + 0.5 * sin) / (sin * sin)
}

/// Signed angular acceleration `θ''(s)` with the default guard band.
pub fn angular_acceleration(theta: Angle) -> Result<f64> {
    angular_acceleration_guarded(theta, GuardBand::default())
}

pub fn angular_acceleration_guarded(theta: Angle, guard: GuardBand) -> Result<f64> {
    guard.check(theta.si())?;
    Ok(acceleration_unchecked(theta.si()))
}

/// Potential whose negative gradient is the signed acceleration,
/// `V(θ) = −2 (csc(θ/2) + sec(θ/2))`.
pub(crate) fn potential_unchecked(theta: f64) -> f64 {
    let half = 0.5 * theta;
    -2.0 * (1.0 / half.sin() + 1.0 / half.cos())
}

/// First integral `E = θ'²/2 + V(θ)` of the rescaled motion.
pub fn conserved_energy(theta: Angle, theta_dot: f64) -> Result<f64> {
    GuardBand::default().check(theta.si())?;
    Ok(0.5 * theta_dot * theta_dot + potential_unchecked(theta.si()))
}

/// Leading-order (constant-acceleration) deviation for small θ0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SmallAngleDeviation {
    pub deviation: f64,
    /// False once the deviation exceeds [`SMALL_ANGLE_VALIDITY`]·θ0.
    pub valid: bool,
}

/// Fraction of θ0 up to which the constant-acceleration law is trusted.
pub const SMALL_ANGLE_VALIDITY: f64 = 1e-3;

/// `|θt − θ0| ≈ 2 t² / (θ0² τ²)`.
pub fn small_angle_deviation(theta0: Angle, tau: Time, t: Time) -> Result<SmallAngleDeviation> {
    let (theta0, tau, t) = (theta0.si(), tau.si(), t.si());
    if !(theta0 > 0.0) || !(tau > 0.0) || !(t >= 0.0) {
        return Err(Error::domain("small-angle law needs θ0 > 0, τ > 0, t ≥ 0"));
    }
    let s = t / tau;
    let deviation = 2.0 * s * s / (theta0 * theta0);
    Ok(SmallAngleDeviation {
        deviation,
        valid: deviation <= SMALL_ANGLE_VALIDITY * theta0,
    })
}

/// Inverse of the small-angle law: `t = θ0 τ sqrt(Δθ/2)`.
pub fn small_angle_crossing_time(theta0: Angle, tau: Time, resolution: Angle) -> Time {
    Time::new(theta0.si() * tau.si() * (0.5 * resolution.si()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct transcription of the half-angle form.
    fn half_angle_form(theta: f64) -> f64 {
        let (s, c) = (0.5 * theta).sin_cos();
        -(c.powi(3) - s.powi(3)) / (c * c * s * s)
    }

    #[test]
    fn tau_for_nominal_rod() {
        let tau = characteristic_time(Length::new(1e-5), Mass::new(1e-20)).unwrap();
        // sqrt(2·1e-15 / (6.6743e-11·1e-20)) = 5.4740925e7 s
        assert!((tau.si() - 5.474_092_553_6e7).abs() < 1.0);
    }

    #[test]
    fn tau_scaling() {
        let base = characteristic_time(Length::new(1e-5), Mass::new(1e-20))
            .unwrap()
            .si();
        let long = characteristic_time(Length::new(4e-5), Mass::new(1e-20))
            .unwrap()
            .si();
        let heavy = characteristic_time(Length::new(1e-5), Mass::new(4e-20))
            .unwrap()
            .si();
        assert!((long / base - 8.0).abs() < 1e-14);
        assert!((heavy / base - 0.5).abs() < 1e-15);
        assert!(characteristic_time(Length::ZERO, Mass::new(1.0)).is_err());
        assert!(characteristic_time(Length::new(1.0), Mass::new(-1.0)).is_err());
    }

    #[test]
    fn acceleration_reference_points() {
        assert_eq!(angular_acceleration(Angle::new(FRAC_PI_2)).unwrap(), 0.0);
        // θ = π/3: −(0.649519 − 0.125)/(0.75·0.25)
        let expected = -(0.75f64.sqrt().powi(3) - 0.125) / (0.75 * 0.25);
        let got = angular_acceleration(Angle::new(PI / 3.0)).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got + 2.797).abs() < 1e-3);

        let theta = 2e-3;
        let got = angular_acceleration(Angle::new(theta)).unwrap();
        let leading = -4.0 / (theta * theta);
        assert!(((got - leading) / leading).abs() < 1e-5);
    }

    #[test]
    fn guard_violations() {
        assert!(matches!(
            angular_acceleration(Angle::new(1e-9)),
            Err(Error::Singularity(_))
        ));
        assert!(angular_acceleration(Angle::new(PI)).is_err());
        assert!(conserved_energy(Angle::new(0.0), 0.0).is_err());
    }

    #[test]
    fn potential_gradient_matches_acceleration() {
        assert!(
            (potential_unchecked(FRAC_PI_2 + 1e-6) - potential_unchecked(FRAC_PI_2 - 1e-6)).abs()
                < 1e-15
        );
        let theta = PI / 3.0;
        let mut last_err = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let fd = -(potential_unchecked(theta + h) - potential_unchecked(theta - h)) / (2.0 * h);
            let err = (fd - acceleration_unchecked(theta)).abs();
            // O(h²): halving h should cut the error by roughly four
            assert!(err < last_err / 3.5);
            last_err = err;
        }
        assert!(last_err < 1e-4);
    }

    #[test]
    fn small_angle_examples() {
        let theta0 = Angle::new(7.92e-4);
        let tau = Time::new(5.47e7);
        assert_eq!(
            small_angle_deviation(theta0, tau, Time::ZERO)
                .unwrap()
                .deviation,
            0.0
        );
        let one = small_angle_deviation(theta0, tau, Time::new(1.0))
            .unwrap()
            .deviation;
        let two = small_angle_deviation(theta0, tau, Time::new(2.0))
            .unwrap()
            .deviation;
        assert!((two / one - 4.0).abs() < 1e-14);
        // 2·2.5² / ((7.92e-4)²·(5.47e7)²) = 6.6603e-9
        let d = small_angle_deviation(theta0, tau, Time::new(2.5)).unwrap();
        assert!((d.deviation - 6.6603e-9).abs() < 1e-12);
        assert!(d.valid);
        assert!(
            !small_angle_deviation(theta0, tau, Time::new(1e3))
                .unwrap()
                .valid
        );

        let t = small_angle_crossing_time(theta0, tau, Angle::new(1e-10));
        assert!((t.si() - 0.3063).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn rewrite_agrees_with_half_angle_form(theta in 1e-3f64..(PI - 1e-3)) {
            let a = acceleration_unchecked(theta);
            let b = half_angle_form(theta);
            prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
        }

        #[test]
        fn odd_about_quarter_turn(theta in 1e-3f64..(PI - 1e-3)) {
            let a = acceleration_unchecked(theta);
            let b = acceleration_unchecked(PI - theta);
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) + 1e-300);
        }

        #[test]
        fn attraction_below_quarter_turn(theta in 1e-6f64..(FRAC_PI_2 - 1e-9)) {
            prop_assert!(acceleration_unchecked(theta) < 0.0);
        }
    }
}
