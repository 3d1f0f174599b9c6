// SPDX-License-Identifier: Apache-2.0

//! Environmental decoherence of the angular superposition.
//!
//! Each channel is a closed-form rate for two spheres a distance `2L` apart
//! whose superposed branches are rotated by θ:
//!
//! | channel | law |
//! |---------|-----|
//! | gas collisions | `64 n √(2π m_gas) / (3ħ²) · r² L² (k_B T_E)^{3/2} · sin²(θ/2)` |
//! | photon scattering | `64·8!·ζ(9)/(9π) · r⁶ L² c · Re(CM)² · (k_B T_E/ħc)⁹ · sin²(θ/2)` |
//! | emission / absorption | `128π⁵/189 · Im(CM) · c r³ L² · (k_B T/ħc)⁶ · sin²(θ/2)` |
//! | scattering, anisotropic form | `6!·2c/(9ε₀²) · (k_B T_E/ħc)⁷ ζ(7) (α_x−α_z)² · sin²θ` |
//!
//! `CM = (ε−1)/(ε+2)`. Emission uses the internal temperature, absorption the
//! external one. The anisotropic scattering law is reported next to the
//! budget for comparison and never added to the total.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{
    BOLTZMANN, FACTORIAL_6, FACTORIAL_8, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY, ZETA_7, ZETA_9,
};
use crate::error::{Error, Result};
use crate::system::{Environment, Nanorod};
use crate::units::{Angle, Polarizability, Rate, Temperature};

/// How the gas mixture enters the collisional rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionModel {
    /// Sum of single-species rates with `n_i = fraction_i · n_gas`.
    #[default]
    PerSpecies,
    /// One species with the fraction-weighted mean molecular mass.
    AveragedMass,
}

fn check_angle(theta: Angle) -> Result<f64> {
    let t = theta.si();
    if !(0.0..=PI).contains(&t) {
        return Err(Error::domain(format!("angle {t} rad is outside [0, π]")));
    }
    Ok(t)
}

fn half_angle_factor(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    s * s
}

/// `k_B T / (ħ c)`, the thermal wavenumber.
fn thermal_wavenumber(t: Temperature) -> f64 {
    BOLTZMANN * t.si() / (HBAR * SPEED_OF_LIGHT)
}

fn geometric_prefactor(rod: &Nanorod) -> (f64, f64) {
    (rod.sphere_radius().si(), rod.half_length().si())
}

pub fn rate_collisional(
    rod: &Nanorod,
    env: &Environment,
    theta: Angle,
    model: CollisionModel,
) -> Result<Rate> {
    let theta = check_angle(theta)?;
    let (r, l) = geometric_prefactor(rod);
    let thermal = (BOLTZMANN * env.external_temperature().si()).powf(1.5);
    let n = env.number_density().si();
    let single = |density: f64, mass: f64| {
        64.0 * density * (2.0 * PI * mass).sqrt() / (3.0 * HBAR * HBAR) * r * r * l * l * thermal
    };
    let sum = match model {
        CollisionModel::PerSpecies => env
            .species()
            .iter()
            .map(|s| single(s.fraction * n, s.molecular_mass.si()))
            .sum::<f64>(),
        CollisionModel::AveragedMass => single(n, env.mean_molecular_mass().si()),
    };
    Ok(Rate::new(sum * half_angle_factor(theta)))
}

pub fn rate_photon_scattering(rod: &Nanorod, env: &Environment, theta: Angle) -> Result<Rate> {
    let theta = check_angle(theta)?;
    let cm = rod.clausius_mossotti()?.re;
    let (r, l) = geometric_prefactor(rod);
    let k = thermal_wavenumber(env.external_temperature());
    let prefactor = 64.0 * FACTORIAL_8 * ZETA_9 / (9.0 * PI);
    Ok(Rate::new(
        prefactor
            * r.powi(6)
            * l
            * l
            * SPEED_OF_LIGHT
            * cm
            * cm
            * k.powi(9)
            * half_angle_factor(theta),
    ))
}

fn thermal_emission_law(rod: &Nanorod, temperature: Temperature, theta: f64) -> Result<Rate> {
    let cm = rod.clausius_mossotti()?.im;
    let (r, l) = geometric_prefactor(rod);
    let k = thermal_wavenumber(temperature);
    Ok(Rate::new(
        128.0 * PI.powi(5) / 189.0
            * cm
            * SPEED_OF_LIGHT
            * r.powi(3)
            * l
            * l
            * k.powi(6)
            * half_angle_factor(theta),
    ))
}

/// Thermal emission at the rod's internal temperature.
pub fn rate_emission(rod: &Nanorod, env: &Environment, theta: Angle) -> Result<Rate> {
    let theta = check_angle(theta)?;
    thermal_emission_law(rod, env.internal_temperature(), theta)
}

/// Thermal absorption at the environment temperature.
pub fn rate_absorption(rod: &Nanorod, env: &Environment, theta: Angle) -> Result<Rate> {
    let theta = check_angle(theta)?;
    thermal_emission_law(rod, env.external_temperature(), theta)
}

/// Photon scattering from the polarizability anisotropy `α_x − α_z`.
pub fn rate_scattering_alternative(
    alpha_x: Polarizability,
    alpha_z: Polarizability,
    env: &Environment,
    theta: Angle,
) -> Result<Rate> {
    let theta = check_angle(theta)?;
    let k = thermal_wavenumber(env.external_temperature());
    let d_alpha = alpha_x.si() - alpha_z.si();
    let s = theta.sin();
    Ok(Rate::new(
        FACTORIAL_6 * 2.0 * SPEED_OF_LIGHT / (9.0 * VACUUM_PERMITTIVITY * VACUUM_PERMITTIVITY)
            * k.powi(7)
            * ZETA_7
            * d_alpha
            * d_alpha
            * s
            * s,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelRate {
    pub channel: &'static str,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceBudget {
    pub angle_used: f64,
    pub external_temperature: f64,
    pub internal_temperature: f64,
    pub rate_collisional: f64,
    pub rate_scattering: f64,
    pub rate_emission: f64,
    pub rate_absorption: f64,
    pub rate_total: f64,
    /// `1/rate_total`; `None` when the total rate is zero.
    pub tau_d: Option<f64>,
    pub tau_d_infinite: bool,
    /// Anisotropic scattering law, for comparison only.
    pub alternative_scattering_rate: Option<f64>,
    /// `alternative_scattering_rate / rate_scattering`.
    pub alternative_to_primary_scattering: Option<f64>,
}

impl DecoherenceBudget {
    pub fn channels(&self) -> [ChannelRate; 4] {
        [
            ChannelRate {
                channel: "collisional",
                rate: self.rate_collisional,
            },
            ChannelRate {
                channel: "scattering",
                rate: self.rate_scattering,
            },
            ChannelRate {
                channel: "emission",
                rate: self.rate_emission,
            },
            ChannelRate {
                channel: "absorption",
                rate: self.rate_absorption,
            },
        ]
    }

    /// Decoherence time, infinite when nothing decoheres.
    pub fn decoherence_time(&self) -> f64 {
        self.tau_d.unwrap_or(f64::INFINITY)
    }
}

/// Sums the four channels at the fixed angle `theta`.
pub fn budget(
    rod: &Nanorod,
    env: &Environment,
    theta: Angle,
    anisotropy: Option<(Polarizability, Polarizability)>,
    model: CollisionModel,
) -> Result<DecoherenceBudget> {
    let collisional = rate_collisional(rod, env, theta, model)?.si();
    let scattering = rate_photon_scattering(rod, env, theta)?.si();
    let emission = rate_emission(rod, env, theta)?.si();
    let absorption = rate_absorption(rod, env, theta)?.si();
    let total = collisional + scattering + emission + absorption;
    let alternative = anisotropy
        .map(|(ax, az)| rate_scattering_alternative(ax, az, env, theta).map(Rate::si))
        .transpose()?;
    let ratio = alternative.and_then(|a| (scattering > 0.0).then(|| a / scattering));
    Ok(DecoherenceBudget {
        angle_used: theta.si(),
        external_temperature: env.external_temperature().si(),
        internal_temperature: env.internal_temperature().si(),
        rate_collisional: collisional,
        rate_scattering: scattering,
        rate_emission: emission,
        rate_absorption: absorption,
        rate_total: total,
        tau_d: (total > 0.0).then(|| 1.0 / total),
        tau_d_infinite: total == 0.0,
        alternative_scattering_rate: alternative,
        alternative_to_primary_scattering: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;
    use crate::system::GasSpecies;
    use crate::units::{Length, Mass, NumberDensity};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn rod_with(eps: Complex64) -> Nanorod {
        Nanorod::new(
            Length::new(7.92e-9),
            Length::new(1e-5),
            Mass::new(1e-20),
            eps,
        )
        .unwrap()
    }

    fn nominal_rod() -> Nanorod {
        rod_with(Complex64::new(5.7, 2.85e-4))
    }

    fn air(t: f64) -> Environment {
        Environment::air(NumberDensity::new(1e9), Temperature::new(t)).unwrap()
    }

    const THETA: Angle = Angle::new(7.92e-4);

    /// Independent evaluation of the collisional law for one species, in the
    /// textbook grouping `n v̄-like · σ · (k L)²` rather than the crate's.
    fn collisional_oracle(n: f64, m_gas: f64, t: f64, r: f64, l: f64, theta: f64) -> f64 {
        let kt = BOLTZMANN * t;
        let prefactor = 64.0 / 3.0 * n * (2.0 * PI * m_gas * kt).sqrt() * kt;
        prefactor * (r * l / HBAR).powi(2) * (theta / 2.0).sin().powi(2)
    }

    #[test]
    fn collisional_rate_at_room_temperature() {
        let rate = rate_collisional(
            &nominal_rod(),
            &air(300.0),
            THETA,
            CollisionModel::PerSpecies,
        )
        .unwrap()
        .si();
        let oracle = collisional_oracle(0.78e9, 28.0134 * AMU, 300.0, 7.92e-9, 1e-5, 7.92e-4)
            + collisional_oracle(0.22e9, 31.9988 * AMU, 300.0, 7.92e-9, 1e-5, 7.92e-4);
        assert!((rate - oracle).abs() / oracle < 1e-12);
        assert!((rate - 276.04).abs() < 0.05, "{rate}");
    }

    #[test]
    fn averaged_mass_mode_matches_single_species_formula() {
        let env = Environment::new(
            vec![GasSpecies::nitrogen(1.0)],
            NumberDensity::new(1e9),
            Temperature::new(300.0),
            Temperature::new(300.0),
        )
        .unwrap();
        let per =
            rate_collisional(&nominal_rod(), &env, THETA, CollisionModel::PerSpecies).unwrap();
        let avg =
            rate_collisional(&nominal_rod(), &env, THETA, CollisionModel::AveragedMass).unwrap();
        assert!((per.si() - avg.si()).abs() / per.si() < 1e-15);

        let mixed_avg = rate_collisional(
            &nominal_rod(),
            &air(300.0),
            THETA,
            CollisionModel::AveragedMass,
        )
        .unwrap();
        let mixed_per = rate_collisional(
            &nominal_rod(),
            &air(300.0),
            THETA,
            CollisionModel::PerSpecies,
        )
        .unwrap();
        // √ of the mean mass vs mean of √ masses: differ slightly
        assert!((mixed_avg.si() / mixed_per.si() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn vanishing_channels() {
        let env = air(300.0);
        let rod = nominal_rod();
        assert_eq!(
            rate_collisional(&rod, &env, Angle::ZERO, CollisionModel::PerSpecies)
                .unwrap()
                .si(),
            0.0
        );
        assert_eq!(
            rate_photon_scattering(&rod, &env, Angle::ZERO)
                .unwrap()
                .si(),
            0.0
        );
        let vacuum_like = rod_with(Complex64::new(1.0, 0.0));
        assert_eq!(
            rate_photon_scattering(&vacuum_like, &env, THETA)
                .unwrap()
                .si(),
            0.0
        );
        let lossless = rod_with(Complex64::new(5.7, 0.0));
        assert_eq!(rate_emission(&lossless, &env, THETA).unwrap().si(), 0.0);
        assert_eq!(rate_absorption(&lossless, &env, THETA).unwrap().si(), 0.0);
        let a = Polarizability::new(1e-30);
        assert_eq!(
            rate_scattering_alternative(a, a, &env, THETA).unwrap().si(),
            0.0
        );
        assert!(rate_collisional(&rod, &env, Angle::new(4.0), CollisionModel::PerSpecies).is_err());
    }

    #[test]
    fn singular_dielectric() {
        let rod = rod_with(Complex64::new(-2.0, 0.0));
        let env = air(300.0);
        assert!(matches!(
            rate_photon_scattering(&rod, &env, THETA),
            Err(Error::Singularity(_))
        ));
        assert!(matches!(
            rate_emission(&rod, &env, THETA),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn photon_channels_at_room_temperature() {
        let env = air(300.0);
        let rod = nominal_rod();
        let scatt = rate_photon_scattering(&rod, &env, THETA).unwrap().si();
        let em = rate_emission(&rod, &env, THETA).unwrap().si();
        let ab = rate_absorption(&rod, &env, THETA).unwrap().si();
        // direct evaluation: 4.4950e-7 and 3.5295e-5 s^-1
        assert!((scatt - 4.4950e-7).abs() / 4.4950e-7 < 1e-4, "{scatt:e}");
        assert!((em - 3.5295e-5).abs() / 3.5295e-5 < 1e-4, "{em:e}");
        assert_eq!(em, ab);
        let coll = rate_collisional(&rod, &env, THETA, CollisionModel::PerSpecies)
            .unwrap()
            .si();
        assert!(scatt < 1e-6 * coll);
    }

    #[test]
    fn exact_temperature_scalings() {
        let rod = nominal_rod();
        let (a, b) = (air(10.0), air(40.0));
        let coll = |e: &Environment| {
            rate_collisional(&rod, e, THETA, CollisionModel::PerSpecies)
                .unwrap()
                .si()
        };
        assert!((coll(&b) / coll(&a) - 8.0).abs() < 1e-12);
        let c = air(20.0);
        let sc = |e: &Environment| rate_photon_scattering(&rod, e, THETA).unwrap().si();
        assert!((sc(&c) / sc(&a) - 512.0).abs() < 1e-9);
        let em = |e: &Environment| rate_emission(&rod, e, THETA).unwrap().si();
        assert!((em(&c) / em(&a) - 64.0).abs() < 1e-10);
    }

    #[test]
    fn budget_at_room_temperature_and_one_kelvin() {
        let rod = nominal_rod();
        let warm = budget(&rod, &air(300.0), THETA, None, CollisionModel::PerSpecies).unwrap();
        let cold = budget(&rod, &air(1.0), THETA, None, CollisionModel::PerSpecies).unwrap();
        assert!((warm.decoherence_time() - 0.0036).abs() / 0.0036 < 0.1);
        assert!((cold.decoherence_time() - 19.0).abs() / 19.0 < 0.1);
        let sum = warm.rate_collisional
            + warm.rate_scattering
            + warm.rate_emission
            + warm.rate_absorption;
        assert!((warm.rate_total - sum).abs() <= 1e-12 * sum);
        assert!((warm.tau_d.unwrap() * warm.rate_total - 1.0).abs() < 1e-12);
        assert!(warm.alternative_scattering_rate.is_none());
    }

    #[test]
    fn empty_environment_never_decoheres() {
        let rod = rod_with(Complex64::new(1.0, 0.0));
        let env = Environment::air(NumberDensity::ZERO, Temperature::new(300.0)).unwrap();
        let b = budget(&rod, &env, THETA, None, CollisionModel::PerSpecies).unwrap();
        assert_eq!(b.rate_total, 0.0);
        assert!(b.tau_d_infinite);
        assert_eq!(b.tau_d, None);
        assert_eq!(b.decoherence_time(), f64::INFINITY);
    }

    #[test]
    fn alternative_law_reported_separately() {
        let rod = nominal_rod();
        let env = air(300.0);
        let aniso = crate::system::two_sphere_anisotropy(&rod).unwrap();
        let b = budget(&rod, &env, THETA, Some(aniso), CollisionModel::PerSpecies).unwrap();
        let alt = b.alternative_scattering_rate.unwrap();
        assert!(alt > 0.0);
        let sum = b.rate_collisional + b.rate_scattering + b.rate_emission + b.rate_absorption;
        assert_eq!(b.rate_total, sum);
        assert!(b.alternative_to_primary_scattering.unwrap() > 0.0);
    }

    proptest! {
        #[test]
        fn angular_dependence(theta in 1e-6f64..PI, t in 0.1f64..400.0) {
            let rod = nominal_rod();
            let env = air(t);
            let th = Angle::new(theta);
            let k = (theta / 2.0).sin().powi(2);
            let base = Angle::new(1.0);
            let k1 = 0.5f64.sin().powi(2);
            let pairs = [
                (rate_collisional(&rod, &env, th, CollisionModel::PerSpecies).unwrap().si(),
                 rate_collisional(&rod, &env, base, CollisionModel::PerSpecies).unwrap().si()),
                (rate_photon_scattering(&rod, &env, th).unwrap().si(), rate_photon_scattering(&rod, &env, base).unwrap().si()),
                (rate_emission(&rod, &env, th).unwrap().si(), rate_emission(&rod, &env, base).unwrap().si()),
            ];
            for (at_theta, at_base) in pairs {
                let lhs = at_theta / k;
                let rhs = at_base / k1;
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
            }
        }

        #[test]
        fn splitting_a_species_changes_nothing(f in 0.05f64..0.95, n in 1e6f64..1e12) {
            let t = Temperature::new(50.0);
            let whole = Environment::new(
                vec![GasSpecies::nitrogen(f), GasSpecies::oxygen(1.0 - f)],
                NumberDensity::new(n), t, t).unwrap();
            let split = Environment::new(
                vec![GasSpecies::nitrogen(f / 2.0), GasSpecies::nitrogen(f / 2.0), GasSpecies::oxygen(1.0 - f)],
                NumberDensity::new(n), t, t).unwrap();
            let a = rate_collisional(&nominal_rod(), &whole, THETA, CollisionModel::PerSpecies).unwrap().si();
            let b = rate_collisional(&nominal_rod(), &split, THETA, CollisionModel::PerSpecies).unwrap().si();
            prop_assert!((a - b).abs() <= 1e-14 * a);
        }

        #[test]
        fn budget_is_monotone(n in 1e6f64..1e12, t in 0.05f64..400.0, k in 1.0f64..3.0, theta in 1e-4f64..1.0) {
            let rod = nominal_rod();
            let env = Environment::air(NumberDensity::new(n), Temperature::new(t)).unwrap();
            let total = |e: &Environment, th: f64| budget(&rod, e, Angle::new(th), None, CollisionModel::PerSpecies).unwrap().rate_total;
            let base = total(&env, theta);
            let denser = env.with_number_density(NumberDensity::new(n * k)).unwrap();
            let hotter_e = env.at_temperatures(Temperature::new(t * k), Temperature::new(t)).unwrap();
            let hotter_i = env.at_temperatures(Temperature::new(t), Temperature::new(t * k)).unwrap();
            prop_assert!(total(&denser, theta) >= base);
            prop_assert!(total(&hotter_e, theta) >= base);
            prop_assert!(total(&hotter_i, theta) >= base);
            prop_assert!(total(&env, (theta * k).min(PI)) >= base);
        }
    }
}
