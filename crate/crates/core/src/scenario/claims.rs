// SPDX-License-Identifier: Apache-2.0

//! Cross-checks of quoted reference values against this implementation.
//!
//! Each item is recomputed from the sounding-rocket preset and compared with
//! the quoted value. Disagreements are flagged, not treated as failures.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::load_config;
use crate::decoherence::budget;
use crate::dynamics::{characteristic_time, integrate, DynamicsConfig, Sampling};
use crate::error::Result;
use crate::protocol::{branch_separation, superposition_angle};
use crate::system::{mass_from_density, pascal_to_mbar, pressure_from_density};
use crate::units::{Angle, MassDensity, Temperature, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// `|computed − claimed| ≤ tol · |claimed|`.
    Relative(f64),
    /// `computed / claimed` within `[1/k, k]`.
    Factor(f64),
    /// `computed > claimed`.
    Exceeds,
}

impl Tolerance {
    fn accepts(self, claimed: f64, computed: f64) -> bool {
        match self {
            Tolerance::Relative(tol) => (computed - claimed).abs() <= tol * claimed.abs(),
            Tolerance::Factor(k) => {
                let ratio = computed / claimed;
                ratio >= 1.0 / k && ratio <= k
            }
            Tolerance::Exceeds => computed > claimed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: &'static str,
    pub description: &'static str,
    pub claimed: f64,
    pub computed: f64,
    pub unit: &'static str,
    pub tolerance: Tolerance,
    pub status: ClaimStatus,
    pub note: String,
}

fn claim(
    id: &'static str,
    description: &'static str,
    claimed: f64,
    computed: f64,
    unit: &'static str,
    tolerance: Tolerance,
    note: impl Into<String>,
) -> Claim {
    let status = if tolerance.accepts(claimed, computed) {
        ClaimStatus::Pass
    } else {
        ClaimStatus::Flag
    };
    Claim {
        id,
        description,
        claimed,
        computed,
        unit,
        tolerance,
        status,
        note: note.into(),
    }
}

/// Diamond density used for the mass plausibility check, kg/m³.
const DIAMOND_DENSITY: f64 = 3500.0;

pub fn check_claims() -> Result<Vec<Claim>> {
    let config = load_config("sounding_rocket")?;
    let rod = config.rod.resolve()?;
    let env = config.environment.resolve()?;
    let theta_quoted = Angle::new(7.92e-4);
    let mut params = config.protocol.params;
    let mut claims = Vec::new();

    let l = rod.half_length();
    for (id, description, t0) in [
        (
            "theta0_transfer_10us",
            "superposition angle from a 10 us transfer at 1e6 T/m",
            10e-6,
        ),
        (
            "theta0_transfer_2_5us",
            "superposition angle from a 2.5 us transfer at 1e6 T/m",
            2.5e-6,
        ),
    ] {
        params.transfer_time = Time::new(t0);
        let delta0 = branch_separation(&params, rod.mass_per_sphere())?;
        let theta = superposition_angle(delta0, l)?;
        claims.push(claim(
            id,
            description,
            theta_quoted.si(),
            theta.si(),
            "rad",
            Tolerance::Relative(0.1),
            format!("arcsin(Δ0/2L) with Δ0 = {:.4e} m", delta0.si()),
        ));
    }

    let tau = characteristic_time(l, rod.mass_per_sphere())?;
    let mut dyn_config = DynamicsConfig::new(theta_quoted);
    dyn_config.sampling = Sampling::Linear { count: 2 };
    let traj = integrate(&dyn_config, tau, Time::new(2.5))?;
    claims.push(claim(
        "deviation_at_2_5s",
        "classical angular deviation after 2.5 s from 7.92e-4 rad",
        5e-10,
        traj.final_sample().deviation,
        "rad",
        Tolerance::Factor(2.0),
        format!(
            "integrated with τ = {:.4e} s; small-angle law gives 2t²/(θ0²τ²)",
            tau.si()
        ),
    ));

    for (id, description, t, claimed) in [
        ("tau_d_300K", "decoherence time at 300 K", 300.0, 0.0036),
        ("tau_d_1K", "decoherence time at 1 K", 1.0, 19.0),
    ] {
        let env_t = env.at_temperatures(Temperature::new(t), Temperature::new(t))?;
        let b = budget(
            &rod,
            &env_t,
            theta_quoted,
            None,
            config.environment.collision_model,
        )?;
        claims.push(claim(
            id,
            description,
            claimed,
            b.decoherence_time(),
            "s",
            Tolerance::Relative(0.1),
            format!("collisional share {:.6}", b.rate_collisional / b.rate_total),
        ));
    }

    let p = pressure_from_density(env.number_density(), Temperature::new(300.0))?;
    claims.push(claim(
        "pressure_300K",
        "pressure of 1e9 m^-3 gas at 300 K",
        4e-14,
        pascal_to_mbar(p),
        "mbar",
        Tolerance::Relative(0.1),
        "ideal gas, p = n k T",
    ));

    claims.push(claim(
        "angular_resolution",
        "1e-15 m readout resolution as an angle",
        1e-10,
        1e-15 / l.si(),
        "rad",
        Tolerance::Relative(1e-12),
        "Δθ = Δx / L",
    ));

    let diamond = mass_from_density(rod.sphere_radius(), MassDensity::new(DIAMOND_DENSITY))?;
    claims.push(claim(
        "diamond_sphere_mass",
        "mass of one diamond sphere of radius 7.92 nm",
        1e-20,
        diamond.si(),
        "kg",
        Tolerance::Factor(2.0),
        format!("density {DIAMOND_DENSITY} kg/m^3; the runs use the quoted mass"),
    ));

    let chord = 2.0 * l.si() * (theta_quoted.si() / 2.0).sin();
    let extent = 2.0 * rod.sphere_radius().si();
    claims.push(claim(
        "branch_non_overlap",
        "branch displacement 2L sin(θ0/2) exceeds the sphere diameter",
        extent,
        chord,
        "m",
        Tolerance::Exceeds,
        format!(
            "chord {:.4e} m against diameter {:.4e} m at θ0 = 7.92e-4 rad",
            chord, extent
        ),
    ));

    Ok(claims)
}

pub fn claims_to_text(claims: &[Claim]) -> String {
    let mut out = String::new();
    for c in claims {
        let status = match c.status {
            ClaimStatus::Pass => "PASS",
            ClaimStatus::Flag => "FLAG",
        };
        let _ = writeln!(
            out,
            "[{status}] {:<22} claimed {:>11.4e} {:<4} computed {:>11.4e} {:<4} {}",
            c.id, c.claimed, c.unit, c.computed, c.unit, c.description
        );
        let _ = writeln!(out, "       {}", c.note);
    }
    let flagged = claims
        .iter()
        .filter(|c| c.status == ClaimStatus::Flag)
        .count();
    let _ = writeln!(out, "{} checked, {} flagged", claims.len(), flagged);
    out
}

pub fn claims_to_csv(claims: &[Claim]) -> String {
    let mut out = String::from("id,claimed,computed,unit,status\n");
    for c in claims {
        let status = match c.status {
            ClaimStatus::Pass => "pass",
            ClaimStatus::Flag => "flag",
        };
        let _ = writeln!(
            out,
            "{},{:e},{:e},{},{status}",
            c.id, c.claimed, c.computed, c.unit
        );
    }
    out
}

pub fn claims_to_json(claims: &[Claim]) -> String {
    let mut s = serde_json::to_string_pretty(claims).expect("claims serialize");
    s.push('\n');
    s
}
