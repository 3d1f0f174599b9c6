// SPDX-License-Identifier: Apache-2.0

//! The levitated rotor and its environment.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::{self, BOLTZMANN, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::units::{
    Length, Mass, MassDensity, NumberDensity, Polarizability, Pressure, Temperature,
};

/// Tolerance on the species fractions summing to one.
pub const FRACTION_SUM_TOLERANCE: f64 = 1e-12;

/// Two identical spheres joined by a massless rigid bar of length `2L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nanorod {
    sphere_radius: Length,
    half_length: Length,
    mass_per_sphere: Mass,
    dielectric: Complex64,
}

impl Nanorod {
    pub fn new(
        sphere_radius: Length,
        half_length: Length,
        mass_per_sphere: Mass,
        dielectric: Complex64,
    ) -> Result<Self> {
        let (r, l, m) = (sphere_radius.si(), half_length.si(), mass_per_sphere.si());
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!(
                "sphere radius must be positive, got {r:e} m"
            )));
        }
        if !(l > r && l.is_finite()) {
            return Err(Error::domain(format!(
                "half-length {l:e} m must exceed the sphere radius {r:e} m"
            )));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain(format!(
                "sphere mass must be positive, got {m:e} kg"
            )));
        }
        if !(dielectric.im >= 0.0) || !dielectric.re.is_finite() || !dielectric.im.is_finite() {
            return Err(Error::domain(format!(
                "dielectric constant must have a finite, non-negative imaginary part, got {dielectric}"
            )));
        }
        Ok(Nanorod {
            sphere_radius,
            half_length,
            mass_per_sphere,
            dielectric,
        })
    }

    pub fn sphere_radius(&self) -> Length {
        self.sphere_radius
    }

    pub fn half_length(&self) -> Length {
        self.half_length
    }

    pub fn mass_per_sphere(&self) -> Mass {
        self.mass_per_sphere
    }

    pub fn dielectric(&self) -> Complex64 {
        self.dielectric
    }

    /// Clausius–Mossotti factor `(ε−1)/(ε+2)`.
    pub fn clausius_mossotti(&self) -> Result<Complex64> {
        clausius_mossotti(self.dielectric)
    }
}

/// `(ε−1)/(ε+2)`, singular at `ε = −2`.
pub fn clausius_mossotti(eps: Complex64) -> Result<Complex64> {
    let denom = eps + 2.0;
    if denom.norm() == 0.0 {
        return Err(Error::singularity(
            "Clausius-Mossotti factor is singular at ε = -2",
        ));
    }
    Ok((eps - 1.0) / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GasSpecies {
    pub name: String,
    pub molecular_mass: Mass,
    pub fraction: f64,
}

impl GasSpecies {
    pub fn new(name: impl Into<String>, molecular_mass: Mass, fraction: f64) -> Result<Self> {
        let name = name.into();
        if !(molecular_mass.si() > 0.0) {
            return Err(Error::domain(format!(
                "species {name}: molecular mass must be positive"
            )));
        }
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::domain(format!(
                "species {name}: fraction {fraction} is outside [0, 1]"
            )));
        }
        Ok(GasSpecies {
            name,
            molecular_mass,
            fraction,
        })
    }

    pub fn nitrogen(fraction: f64) -> Self {
        GasSpecies {
            name: "N2".into(),
            molecular_mass: Mass::new(constants::N2_AMU * constants::AMU),
            fraction,
        }
    }

    pub fn oxygen(fraction: f64) -> Self {
        GasSpecies {
            name: "O2".into(),
            molecular_mass: Mass::new(constants::O2_AMU * constants::AMU),
            fraction,
        }
    }
}

/// Residual gas and thermal radiation surrounding the rotor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    species: Vec<GasSpecies>,
    number_density: NumberDensity,
    external_temperature: Temperature,
    internal_temperature: Temperature,
}

impl Environment {
    pub fn new(
        species: Vec<GasSpecies>,
        number_density: NumberDensity,
        external_temperature: Temperature,
        internal_temperature: Temperature,
    ) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::domain("environment needs at least one gas species"));
        }
        let total: f64 = species.iter().map(|s| s.fraction).sum();
        if (total - 1.0).abs() > FRACTION_SUM_TOLERANCE {
            return Err(Error::domain(format!(
                "species fractions sum to {total}, expected 1"
            )));
        }
        if !(number_density.si() >= 0.0) {
            return Err(Error::domain("number density must be non-negative"));
        }
        for (label, t) in [
            ("external", external_temperature),
            ("internal", internal_temperature),
        ] {
            if !(t.si() > 0.0 && t.si().is_finite()) {
                return Err(Error::domain(format!(
                    "{label} temperature must be positive, got {} K",
                    t.si()
                )));
            }
        }
        Ok(Environment {
            species,
            number_density,
            external_temperature,
            internal_temperature,
        })
    }

    /// 78 % N₂, 22 % O₂ at thermal equilibrium.
    pub fn air(number_density: NumberDensity, temperature: Temperature) -> Result<Self> {
        Self::new(
            vec![GasSpecies::nitrogen(0.78), GasSpecies::oxygen(0.22)],
            number_density,
            temperature,
            temperature,
        )
    }

    pub fn species(&self) -> &[GasSpecies] {
        &self.species
    }

    pub fn number_density(&self) -> NumberDensity {
        self.number_density
    }

    pub fn external_temperature(&self) -> Temperature {
        self.external_temperature
    }

    pub fn internal_temperature(&self) -> Temperature {
        self.internal_temperature
    }

    /// Fraction-weighted mean molecular mass.
    pub fn mean_molecular_mass(&self) -> Mass {
        Mass::new(
            self.species
                .iter()
                .map(|s| s.fraction * s.molecular_mass.si())
                .sum(),
        )
    }

    /// Copy with both temperatures replaced.
    pub fn at_temperatures(&self, external: Temperature, internal: Temperature) -> Result<Self> {
        Self::new(
            self.species.clone(),
            self.number_density,
            external,
            internal,
        )
    }

    pub fn with_number_density(&self, number_density: NumberDensity) -> Result<Self> {
        Self::new(
            self.species.clone(),
            number_density,
            self.external_temperature,
            self.internal_temperature,
        )
    }
}

/// Mass of a homogeneous sphere, `(4/3)π r³ ρ`.
pub fn mass_from_density(radius: Length, density: MassDensity) -> Result<Mass> {
    let (r, rho) = (radius.si(), density.si());
    if !(r > 0.0) || !(rho > 0.0) {
        return Err(Error::domain(format!(
            "radius and density must be positive, got r = {r:e} m, ρ = {rho:e} kg/m^3"
        )));
    }
    Ok(Mass::new(4.0 / 3.0 * PI * r.powi(3) * rho))
}

/// Ideal-gas pressure `p = n k_B T`.
pub fn pressure_from_density(
    number_density: NumberDensity,
    temperature: Temperature,
) -> Result<Pressure> {
    let (n, t) = (number_density.si(), temperature.si());
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be positive, got {t} K"
        )));
    }
    if !(n >= 0.0) {
        return Err(Error::domain(format!(
            "number density must be non-negative, got {n:e}"
        )));
    }
    Ok(Pressure::new(n * BOLTZMANN * t))
}

/// Inverse of [`pressure_from_density`].
pub fn density_from_pressure(
    pressure: Pressure,
    temperature: Temperature,
) -> Result<NumberDensity> {
    let (p, t) = (pressure.si(), temperature.si());
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be positive, got {t} K"
        )));
    }
    if !(p >= 0.0) {
        return Err(Error::domain(format!(
            "pressure must be non-negative, got {p:e} Pa"
        )));
    }
    Ok(NumberDensity::new(p / (BOLTZMANN * t)))
}

/// Pascal to millibar.
pub fn pascal_to_mbar(p: Pressure) -> f64 {
    p.si() / 100.0
}

/// Small-sphere polarizability `4π ε₀ r³ (ε−1)/(ε+2)` in C·m²/V.
pub fn sphere_polarizability(radius: Length, eps: Complex64) -> Result<Complex64> {
    let r = radius.si();
    if !(r > 0.0) {
        return Err(Error::domain(format!(
            "radius must be positive, got {r:e} m"
        )));
    }
    Ok(clausius_mossotti(eps)? * (4.0 * PI * VACUUM_PERMITTIVITY * r.powi(3)))
}

/// Axial minus transverse polarizability of two identical spheres a distance
/// `2L` apart, to first order in the induced-dipole coupling
/// `β = α/(4π ε₀ (2L)³)`: `α∥ = 2α/(1−2β)`, `α⊥ = 2α/(1+β)`.
///
/// This is an indicative estimate; the rod's real polarizability tensor
/// depends on the bar and the sphere shapes.
pub fn two_sphere_anisotropy(rod: &Nanorod) -> Result<(Polarizability, Polarizability)> {
    let alpha = sphere_polarizability(rod.sphere_radius(), rod.dielectric())?.re;
    let d = 2.0 * rod.half_length().si();
    let beta = alpha / (4.0 * PI * VACUUM_PERMITTIVITY * d.powi(3));
    let axial = 2.0 * alpha / (1.0 - 2.0 * beta);
    let transverse = 2.0 * alpha / (1.0 + beta);
    Ok((Polarizability::new(axial), Polarizability::new(transverse)))
}
