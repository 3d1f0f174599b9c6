// SPDX-License-Identifier: Apache-2.0

//! Superposition preparation: spin-to-torsion transfer in a field gradient
//! and the timing budget against the spin coherence time.

use serde::Serialize;

use crate::constants::BOHR_MAGNETON;
use crate::error::{Error, Result};
use crate::system::Nanorod;
use crate::units::{Angle, FieldGradient, Length, Mass, Time};

/// Relative slack when comparing timeline sums, so that e.g. 40 × 2.5 μs
/// against 100 μs is not decided by the last bit.
const TIMELINE_RELATIVE_SLACK: f64 = 1e-12;

/// Inputs of the transfer stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub gradient: FieldGradient,
    pub transfer_time: Time,
    pub measurement_time: Time,
    pub spin_coherence: Time,
    pub lande_g: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            gradient: FieldGradient::new(1e6),
            transfer_time: Time::new(2.5e-6),
            measurement_time: Time::ZERO,
            spin_coherence: Time::new(100e-6),
            lande_g: 2.0,
        }
    }
}

impl ProtocolParams {
    fn check(&self) -> Result<()> {
        if !(self.transfer_time.si() >= 0.0) {
            return Err(Error::domain("transfer time must be non-negative"));
        }
        if !(self.measurement_time.si() >= 0.0) {
            return Err(Error::domain("measurement time must be non-negative"));
        }
        if !(self.spin_coherence.si() > 0.0) {
            return Err(Error::domain("spin coherence time must be positive"));
        }
        if !(self.gradient.si() >= 0.0) || !(self.lande_g > 0.0) {
            return Err(Error::domain(
                "gradient must be non-negative and g factor positive",
            ));
        }
        Ok(())
    }
}

/// A transfer plan resolved against a rod: the inputs plus the resulting
/// branch separation and superposition angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolPlan {
    pub params: ProtocolParams,
    pub delta0: Length,
    pub theta0: Angle,
}

impl ProtocolPlan {
    pub fn resolve(params: ProtocolParams, rod: &Nanorod) -> Result<Self> {
        params.check()?;
        let delta0 = branch_separation(&params, rod.mass_per_sphere())?;
        let theta0 = superposition_angle(delta0, rod.half_length())?;
        Ok(ProtocolPlan {
            params,
            delta0,
            theta0,
        })
    }
}

/// `Δ0 = (g μ_B / m) ∂B t0²`.
pub fn branch_separation(params: &ProtocolParams, mass: Mass) -> Result<Length> {
    let m = mass.si();
    if !(m > 0.0) {
        return Err(Error::domain(format!(
            "mass must be positive, got {m:e} kg"
        )));
    }
    let t0 = params.transfer_time.si();
    Ok(Length::new(
        params.lande_g * BOHR_MAGNETON / m * params.gradient.si() * t0 * t0,
    ))
}

/// `θ0 = arcsin(Δ0 / 2L)`.
pub fn superposition_angle(delta0: Length, half_length: Length) -> Result<Angle> {
    let (d, l) = (delta0.si(), half_length.si());
    if !(l > 0.0) {
        return Err(Error::domain("half-length must be positive"));
    }
    if !(d >= 0.0) {
        return Err(Error::domain(format!(
            "branch separation must be non-negative, got {d:e}"
        )));
    }
    if d > 2.0 * l {
        return Err(Error::UnreachableAngle {
            delta0: d,
            span: 2.0 * l,
        });
    }
    Ok(Angle::new((d / (2.0 * l)).asin()))
}

/// One inequality `lhs ≤ rhs` of a validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative when violated.
    pub margin: f64,
    pub passed: bool,
}

impl Constraint {
    fn at_most(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = rhs - lhs;
        Constraint {
            name: name.to_owned(),
            lhs,
            rhs,
            margin,
            passed: margin >= -slack * rhs.abs().max(lhs.abs()),
        }
    }

    fn exceeds(name: &str, lhs: f64, rhs: f64) -> Self {
        Constraint {
            name: name.to_owned(),
            lhs,
            rhs,
            margin: lhs - rhs,
            passed: lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub constraints: Vec<Constraint>,
}

impl ValidationReport {
    fn from_constraints(constraints: Vec<Constraint>) -> Self {
        ValidationReport {
            passed: constraints.iter().all(|c| c.passed),
            constraints,
        }
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

/// Checks `t0 · safety_factor ≤ T2` and `t0 + δt ≤ T2`.
pub fn validate_timeline(params: &ProtocolParams, safety_factor: f64) -> Result<ValidationReport> {
    if !(safety_factor >= 1.0) {
        return Err(Error::domain(format!(
            "safety factor must be at least 1, got {safety_factor}"
        )));
    }
    let t0 = params.transfer_time.si();
    let t2 = params.spin_coherence.si();
    Ok(ValidationReport::from_constraints(vec![
        Constraint::at_most(
            "transfer_time_with_safety_factor",
            t0 * safety_factor,
            t2,
            TIMELINE_RELATIVE_SLACK,
        ),
        Constraint::at_most(
            "transfer_plus_measurement",
            t0 + params.measurement_time.si(),
            t2,
            TIMELINE_RELATIVE_SLACK,
        ),
    ]))
}

/// Passes iff the chord `2L sin(θ0/2)` exceeds `2r + wavepacket_width`.
pub fn non_overlap_check(
    theta0: Angle,
    half_length: Length,
    sphere_radius: Length,
    wavepacket_width: Length,
) -> Result<ValidationReport> {
    let (theta, l, r, w) = (
        theta0.si(),
        half_length.si(),
        sphere_radius.si(),
        wavepacket_width.si(),
    );
    if !(theta >= 0.0 && l > 0.0 && r >= 0.0 && w >= 0.0) {
        return Err(Error::domain("non-overlap check needs non-negative inputs"));
    }
    let chord = 2.0 * l * (theta / 2.0).sin();
    Ok(ValidationReport::from_constraints(vec![
        Constraint::exceeds("branch_chord_exceeds_extent", chord, 2.0 * r + w),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step3() -> ProtocolParams {
        ProtocolParams::default()
    }

    #[test]
    fn separation_for_the_nominal_transfer() {
        let d = branch_separation(&step3(), Mass::new(1e-20)).unwrap();
        // 2 · 9.2740100783e-24 / 1e-20 · 1e6 · (2.5e-6)² = 1.15925126e-8
        assert!((d.si() - 1.159_251_259_787_5e-8).abs() < 1e-20);
        let theta = superposition_angle(d, Length::new(1e-5)).unwrap();
        assert!((theta.si() - 5.796_256_3e-4).abs() < 1e-10);
    }

    #[test]
    fn separation_scaling_and_zero() {
        let mut p = step3();
        p.transfer_time = Time::ZERO;
        assert_eq!(branch_separation(&p, Mass::new(1e-20)).unwrap().si(), 0.0);
        p.transfer_time = Time::new(1e-6);
        let a = branch_separation(&p, Mass::new(1e-20)).unwrap();
        p.transfer_time = Time::new(4e-6);
        let b = branch_separation(&p, Mass::new(1e-20)).unwrap();
        assert_eq!(b.si() / a.si(), 16.0);
        assert!(branch_separation(&p, Mass::ZERO).is_err());
    }

    #[test]
    fn angle_limits() {
        let l = Length::new(1e-5);
        assert_eq!(superposition_angle(Length::ZERO, l).unwrap().si(), 0.0);
        assert_eq!(
            superposition_angle(Length::new(2e-5), l).unwrap().si(),
            std::f64::consts::FRAC_PI_2
        );
        assert!(matches!(
            superposition_angle(Length::new(2.000001e-5), l),
            Err(Error::UnreachableAngle { .. })
        ));
    }

    #[test]
    fn timeline_examples() {
        let report = validate_timeline(&step3(), 40.0).unwrap();
        assert!(report.passed);
        let c = report
            .constraint("transfer_time_with_safety_factor")
            .unwrap();
        assert!(c.margin.abs() < 1e-18);

        let mut p = step3();
        p.transfer_time = Time::new(3e-6);
        let report = validate_timeline(&p, 40.0).unwrap();
        assert!(!report.passed);
        assert!(
            !report
                .constraint("transfer_time_with_safety_factor")
                .unwrap()
                .passed
        );
        assert!(
            report
                .constraint("transfer_plus_measurement")
                .unwrap()
                .passed
        );

        p.transfer_time = p.spin_coherence;
        assert!(validate_timeline(&p, 1.0).unwrap().passed);
        let report = validate_timeline(&p, 1.5).unwrap();
        assert!(
            report
                .constraint("transfer_plus_measurement")
                .unwrap()
                .passed
        );
        assert!(!report.passed);

        assert!(validate_timeline(&p, 0.5).is_err());
    }

    #[test]
    fn overlap_examples() {
        let l = Length::new(1e-5);
        let r = Length::new(7.92e-9);
        let tight = non_overlap_check(Angle::new(5.8e-4), l, r, Length::ZERO).unwrap();
        assert!(!tight.passed);
        assert!((tight.constraints[0].lhs - 5.8e-9).abs() < 1e-12);

        let wide =
            non_overlap_check(Angle::new(std::f64::consts::FRAC_PI_2), l, r, Length::ZERO).unwrap();
        assert!(wide.passed);
        assert!(wide.constraints[0].lhs / wide.constraints[0].rhs > 500.0);

        let points = non_overlap_check(Angle::new(1e-12), l, Length::ZERO, Length::ZERO).unwrap();
        assert!(points.passed);
    }

    proptest! {
        #[test]
        fn separation_is_monotone(
            t0 in 1e-7f64..1e-4, k in 1.01f64..10.0, grad in 1e3f64..1e7, m in 1e-22f64..1e-18
        ) {
            let base = ProtocolParams { transfer_time: Time::new(t0), gradient: FieldGradient::new(grad), ..step3() };
            let d = branch_separation(&base, Mass::new(m)).unwrap().si();
            let longer = ProtocolParams { transfer_time: Time::new(t0 * k), ..base };
            let steeper = ProtocolParams { gradient: FieldGradient::new(grad * k), ..base };
            let larger_g = ProtocolParams { lande_g: base.lande_g * k, ..base };
            prop_assert!(branch_separation(&longer, Mass::new(m)).unwrap().si() > d);
            prop_assert!(branch_separation(&steeper, Mass::new(m)).unwrap().si() > d);
            prop_assert!(branch_separation(&larger_g, Mass::new(m)).unwrap().si() > d);
            prop_assert!(branch_separation(&base, Mass::new(m * k)).unwrap().si() < d);
        }

        #[test]
        fn small_angle_expansion_bound(x in 0.0f64..0.1) {
            let l = Length::new(1e-5);
            let theta = superposition_angle(Length::new(x * 2e-5), l).unwrap().si();
            prop_assert!((theta - x).abs() <= x.powi(3));
        }

        #[test]
        fn angle_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(b - a > 1e-9);
            let l = Length::new(1.0);
            let ta = superposition_angle(Length::new(2.0 * a), l).unwrap().si();
            let tb = superposition_angle(Length::new(2.0 * b), l).unwrap().si();
            prop_assert!(ta < tb);
        }

        #[test]
        fn timeline_monotone_in_coherence(t0 in 1e-7f64..1e-4, t2 in 1e-6f64..1e-3, k in 1.0f64..10.0, sf in 1.0f64..50.0) {
            let p = ProtocolParams { transfer_time: Time::new(t0), spin_coherence: Time::new(t2), ..step3() };
            let q = ProtocolParams { spin_coherence: Time::new(t2 * k), ..p };
            if validate_timeline(&p, sf).unwrap().passed {
                prop_assert!(validate_timeline(&q, sf).unwrap().passed);
            }
        }
    }
}
