// SPDX-License-Identifier: Apache-2.0

//! Dimension-tagged quantities.
//!
//! Every physical input is carried as a newtype around its SI value. The
//! arithmetic operators are only implemented within one dimension, so adding
//! a [`Length`] to a [`Time`] does not compile. Text input (configuration
//! files, CLI values) goes through [`Quantity::parse`], which accepts a unit
//! suffix and rejects suffixes belonging to another dimension.
//!
//! ```
//! use torsion_balance::units::{Length, Quantity};
//!
//! let r = Length::parse("7.92 nm").unwrap();
//! assert_eq!(r.si(), 7.92e-9);
//! assert!(Length::parse("7.92 K").is_err());
//! ```

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// How a unit suffix maps onto the SI base unit.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// Exact decimal shift. Applied textually so that `7.92 nm` parses to the
    /// same double as `7.92e-9`.
    Pow10(i32),
    /// Non-decimal conversion (atomic mass unit).
    Scale(f64),
}

/// Error produced by [`Quantity::parse`].
#[derive(Debug, Clone, PartialEq)]
pub enum UnitParseError {
    MissingUnit,
    BadNumber(String),
    WrongDimension {
        expected: &'static str,
        found: String,
    },
}

impl fmt::Display for UnitParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitParseError::MissingUnit => f.write_str("missing unit suffix"),
            UnitParseError::BadNumber(s) => write!(f, "`{s}` is not a number"),
            UnitParseError::WrongDimension { expected, found } => {
                write!(f, "unit `{found}` is not a {expected} unit")
            }
        }
    }
}

impl std::error::Error for UnitParseError {}

/// A scalar quantity of a fixed physical dimension stored in SI units.
pub trait Quantity: Sized + Copy {
    /// Human-readable dimension name, e.g. `"length"`.
    const DIMENSION: &'static str;
    /// Symbol of the SI unit used when writing values back out.
    const SI_UNIT: &'static str;

    fn from_si(value: f64) -> Self;
    fn si(self) -> f64;

    #[doc(hidden)]
    fn unit_factor(unit: &str) -> Option<Factor>;

    /// Parses `"<number> <unit>"`; whitespace between the two is optional.
    fn parse(text: &str) -> Result<Self, UnitParseError> {
        let text = text.trim();
        let split = text
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || c == '+'
                    || c == '-'
                    || ((c == 'e' || c == 'E') && i > 0 && looks_like_exponent(&text[i..])))
            })
            .map(|(i, _)| i)
            .unwrap_or(text.len());
        let (number, unit) = text.split_at(split);
        let unit = unit.trim();
        if number.is_empty() {
            return Err(UnitParseError::BadNumber(text.to_owned()));
        }
        if unit.is_empty() {
            return Err(UnitParseError::MissingUnit);
        }
        let factor = Self::unit_factor(unit).ok_or_else(|| UnitParseError::WrongDimension {
            expected: Self::DIMENSION,
            found: unit.to_owned(),
        })?;
        let value = apply_factor(number, factor)?;
        Ok(Self::from_si(value))
    }

    /// Formats the SI value with the shortest round-tripping representation.
    fn to_si_string(self) -> String {
        format!("{:e} {}", self.si(), Self::SI_UNIT)
    }
}

fn looks_like_exponent(rest: &str) -> bool {
    let mut chars = rest.chars().skip(1);
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

fn apply_factor(number: &str, factor: Factor) -> Result<f64, UnitParseError> {
    let bad = || UnitParseError::BadNumber(number.to_owned());
    match factor {
        Factor::Scale(k) => number.parse::<f64>().map(|v| v * k).map_err(|_| bad()),
        Factor::Pow10(0) => number.parse::<f64>().map_err(|_| bad()),
        Factor::Pow10(shift) => {
            let (mantissa, exponent) = match number.find(['e', 'E']) {
                Some(i) => (
                    &number[..i],
                    number[i + 1..].parse::<i32>().map_err(|_| bad())?,
                ),
                None => (number, 0),
            };
            // validate the mantissa on its own before re-assembling
            mantissa.parse::<f64>().map_err(|_| bad())?;
            format!("{mantissa}e{}", exponent + shift)
                .parse::<f64>()
                .map_err(|_| bad())
        }
    }
}

macro_rules! quantity {
    (
        $(#[$meta:meta])*
        $name:ident, $dimension:literal, $si_unit:literal,
        { $($unit:literal => $factor:expr),* $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(f64);

        impl $name {
            pub const ZERO: Self = Self(0.0);

            pub const fn new(si: f64) -> Self {
                Self(si)
            }

            pub const fn si(self) -> f64 {
                self.0
            }
        }

        impl Quantity for $name {
            const DIMENSION: &'static str = $dimension;
            const SI_UNIT: &'static str = $si_unit;

            fn from_si(value: f64) -> Self {
                Self(value)
            }

            fn si(self) -> f64 {
                self.0
            }

            fn unit_factor(unit: &str) -> Option<Factor> {
                match unit {
                    $($unit => Some($factor),)*
                    _ => None,
                }
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                Self(-self.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl Mul<$name> for f64 {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                $name(self * rhs.0)
            }
        }

        impl Div<f64> for $name {
            type Output = Self;
            fn div(self, rhs: f64) -> Self {
                Self(self.0 / rhs)
            }
        }

        impl Div for $name {
            type Output = f64;
            fn div(self, rhs: Self) -> f64 {
                self.0 / rhs.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:e} {}", self.0, $si_unit)
            }
        }
    };
}

quantity!(
    /// Length in metres.
    Length, "length", "m",
    {
        "m" => Factor::Pow10(0), "km" => Factor::Pow10(3), "cm" => Factor::Pow10(-2),
        "mm" => Factor::Pow10(-3), "um" => Factor::Pow10(-6), "μm" => Factor::Pow10(-6),
        "nm" => Factor::Pow10(-9), "pm" => Factor::Pow10(-12), "fm" => Factor::Pow10(-15),
    }
);

quantity!(
    /// Mass in kilograms.
    Mass, "mass", "kg",
    {
        "kg" => Factor::Pow10(0), "g" => Factor::Pow10(-3),
        "amu" => Factor::Scale(crate::constants::AMU), "u" => Factor::Scale(crate::constants::AMU),
        "Da" => Factor::Scale(crate::constants::AMU),
    }
);

quantity!(
    /// Time in seconds.
    Time, "time", "s",
    {
        "s" => Factor::Pow10(0), "ms" => Factor::Pow10(-3), "us" => Factor::Pow10(-6),
        "μs" => Factor::Pow10(-6), "ns" => Factor::Pow10(-9),
    }
);

quantity!(
    /// Absolute temperature in kelvin.
    Temperature, "temperature", "K",
    { "K" => Factor::Pow10(0), "mK" => Factor::Pow10(-3) }
);

quantity!(
    /// Particle number density in m⁻³.
    NumberDensity, "number density", "m^-3",
    { "m^-3" => Factor::Pow10(0), "/m^3" => Factor::Pow10(0), "cm^-3" => Factor::Pow10(6) }
);

quantity!(
    /// Pressure in pascal.
    Pressure, "pressure", "Pa",
    { "Pa" => Factor::Pow10(0), "mbar" => Factor::Pow10(2), "bar" => Factor::Pow10(5) }
);

quantity!(
    /// Magnetic field gradient in T/m.
    FieldGradient, "magnetic field gradient", "T/m",
    { "T/m" => Factor::Pow10(0), "T/um" => Factor::Pow10(6), "T/μm" => Factor::Pow10(6) }
);

quantity!(
    /// Plane angle in radians.
    Angle, "angle", "rad",
    { "rad" => Factor::Pow10(0), "mrad" => Factor::Pow10(-3), "urad" => Factor::Pow10(-6) }
);

quantity!(
    /// Mass density in kg/m³.
    MassDensity, "mass density", "kg/m^3",
    { "kg/m^3" => Factor::Pow10(0), "g/cm^3" => Factor::Pow10(3) }
);

quantity!(
    /// Electric polarizability in C·m²/V.
    Polarizability, "polarizability", "C*m^2/V",
    { "C*m^2/V" => Factor::Pow10(0), "F*m^2" => Factor::Pow10(0) }
);

quantity!(
    /// Acceleration in m/s².
    Acceleration, "acceleration", "m/s^2",
    { "m/s^2" => Factor::Pow10(0) }
);

quantity!(
    /// Rate in s⁻¹.
    Rate, "rate", "s^-1",
    { "s^-1" => Factor::Pow10(0), "Hz" => Factor::Pow10(0) }
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_prefixes_are_exact() {
        assert_eq!(Length::parse("7.92 nm").unwrap().si(), 7.92e-9);
        assert_eq!(Length::parse("10um").unwrap().si(), 1e-5);
        assert_eq!(Time::parse("2.5 us").unwrap().si(), 2.5e-6);
        assert_eq!(Pressure::parse("4e-14 mbar").unwrap().si(), 4e-12);
        assert_eq!(FieldGradient::parse("1e6 T/m").unwrap().si(), 1e6);
        assert_eq!(NumberDensity::parse("1e9 m^-3").unwrap().si(), 1e9);
        assert_eq!(Temperature::parse("0.1 K").unwrap().si(), 0.1);
        assert_eq!(Length::parse("-1.5E-3 mm").unwrap().si(), -1.5e-6);
    }

    #[test]
    fn atomic_mass_unit_scales() {
        let m = Mass::parse("28.0134 amu").unwrap();
        assert_eq!(m.si(), 28.0134 * crate::constants::AMU);
    }

    #[test]
    fn rejects_foreign_and_missing_units() {
        assert_eq!(
            Length::parse("3 K"),
            Err(UnitParseError::WrongDimension {
                expected: "length",
                found: "K".into()
            })
        );
        assert_eq!(Time::parse("3"), Err(UnitParseError::MissingUnit));
        assert!(matches!(
            Time::parse("abc s"),
            Err(UnitParseError::BadNumber(_))
        ));
        assert!(matches!(
            Time::parse("1.2.3 s"),
            Err(UnitParseError::BadNumber(_))
        ));
    }

    #[test]
    fn si_string_round_trips() {
        for v in [7.92e-9, 1e-5, 0.1, 123.456, 1.0 / 3.0] {
            let l = Length::new(v);
            assert_eq!(Length::parse(&l.to_si_string()).unwrap(), l);
        }
    }
}
