// SPDX-License-Identifier: Apache-2.0

//! Physical constants (CODATA 2018) and the pure-number constants used by the
//! decoherence closed forms.
//!
//! | Symbol | Value | Unit | Source |
//! |--------|-------|------|--------|
//! | G | 6.674 30 × 10⁻¹¹ | m³ kg⁻¹ s⁻² | CODATA 2018 |
//! | ħ | 1.054 571 817 × 10⁻³⁴ | J s | exact (SI 2019) |
//! | k_B | 1.380 649 × 10⁻²³ | J K⁻¹ | exact (SI 2019) |
//! | c | 299 792 458 | m s⁻¹ | exact |
//! | μ_B | 9.274 010 0783 × 10⁻²⁴ | J T⁻¹ | CODATA 2018 |
//! | ε₀ | 8.854 187 8128 × 10⁻¹² | F m⁻¹ | CODATA 2018 |
//! | u | 1.660 539 066 60 × 10⁻²⁷ | kg | CODATA 2018 |

use serde::Serialize;

pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Standard gravity used for the free-fall distance axis.
pub const STANDARD_FREE_FALL: f64 = 9.81;

/// Riemann ζ(7).
pub const ZETA_7: f64 = 1.008_349_277_381_922_8;
/// Riemann ζ(9).
pub const ZETA_9: f64 = 1.002_008_392_826_082_2;
/// 6!
pub const FACTORIAL_6: f64 = 720.0;
/// 8!
pub const FACTORIAL_8: f64 = 40_320.0;

/// Molecular mass of N₂ in atomic mass units.
pub const N2_AMU: f64 = 28.0134;
/// Molecular mass of O₂ in atomic mass units.
pub const O2_AMU: f64 = 31.9988;

/// The constants bundled as one value, for reports and documentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub gravitational_constant: f64,
    pub hbar: f64,
    pub boltzmann: f64,
    pub speed_of_light: f64,
    pub bohr_magneton: f64,
    pub vacuum_permittivity: f64,
    pub amu: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        gravitational_constant: GRAVITATIONAL_CONSTANT,
        hbar: HBAR,
        boltzmann: BOLTZMANN,
        speed_of_light: SPEED_OF_LIGHT,
        bohr_magneton: BOHR_MAGNETON,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        amu: AMU,
    };

    pub fn as_array(&self) -> [f64; 7] {
        [
            self.gravitational_constant,
            self.hbar,
            self.boltzmann,
            self.speed_of_light,
            self.bohr_magneton,
            self.vacuum_permittivity,
            self.amu,
        ]
    }
}
