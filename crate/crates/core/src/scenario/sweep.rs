// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{MassSpec, ScenarioConfig};
use super::run::{run, RunReport};
use crate::error::{ConfigError, Result};
use crate::units::{FieldGradient, Length, Mass, NumberDensity, Quantity, Temperature, Time};

/// A scalar input that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    ExternalTemperature,
    NumberDensity,
    HalfLength,
    SphereRadius,
    Mass,
    Gradient,
    TransferTime,
    Duration,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 8] = [
        SweepAxis::ExternalTemperature,
        SweepAxis::NumberDensity,
        SweepAxis::HalfLength,
        SweepAxis::SphereRadius,
        SweepAxis::Mass,
        SweepAxis::Gradient,
        SweepAxis::TransferTime,
        SweepAxis::Duration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ExternalTemperature => "T_E",
            SweepAxis::NumberDensity => "n_gas",
            SweepAxis::HalfLength => "L",
            SweepAxis::SphereRadius => "r",
            SweepAxis::Mass => "m",
            SweepAxis::Gradient => "dxB",
            SweepAxis::TransferTime => "t0",
            SweepAxis::Duration => "duration",
        }
    }

    fn si_unit(self) -> &'static str {
        match self {
            SweepAxis::ExternalTemperature => Temperature::SI_UNIT,
            SweepAxis::NumberDensity => NumberDensity::SI_UNIT,
            SweepAxis::HalfLength | SweepAxis::SphereRadius => Length::SI_UNIT,
            SweepAxis::Mass => Mass::SI_UNIT,
            SweepAxis::Gradient => FieldGradient::SI_UNIT,
            SweepAxis::TransferTime | SweepAxis::Duration => Time::SI_UNIT,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
                ConfigError::InvalidValue {
                    key: "axis".into(),
                    message: format!(
                        "unknown axis `{name}`; sweepable axes are {}",
                        names.join(", ")
                    ),
                }
                .into()
            })
    }

    /// Parses one value: a number with a unit suffix, or a bare number taken
    /// in the axis' SI unit.
    pub fn parse_value(self, text: &str) -> Result<f64> {
        fn with<Q: Quantity>(text: &str) -> std::result::Result<f64, String> {
            match text.trim().parse::<f64>() {
                Ok(v) => Ok(v),
                Err(_) => Q::parse(text).map(Q::si).map_err(|e| e.to_string()),
            }
        }
        let parsed = match self {
            SweepAxis::ExternalTemperature => with::<Temperature>(text),
            SweepAxis::NumberDensity => with::<NumberDensity>(text),
            SweepAxis::HalfLength | SweepAxis::SphereRadius => with::<Length>(text),
            SweepAxis::Mass => with::<Mass>(text),
            SweepAxis::Gradient => with::<FieldGradient>(text),
            SweepAxis::TransferTime | SweepAxis::Duration => with::<Time>(text),
        };
        parsed.map_err(|message| {
            ConfigError::InvalidValue {
                key: format!("values ({})", self.name()),
                message,
            }
            .into()
        })
    }

    /// Copy of `config` with this axis set to `value` (SI).
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = config.clone();
        match self {
            // an unset internal temperature keeps following the environment
            SweepAxis::ExternalTemperature => {
                c.environment.external_temperature = Temperature::new(value)
            }
            SweepAxis::NumberDensity => c.environment.number_density = NumberDensity::new(value),
            SweepAxis::HalfLength => c.rod.half_length = Length::new(value),
            SweepAxis::SphereRadius => c.rod.sphere_radius = Length::new(value),
            SweepAxis::Mass => c.rod.mass = MassSpec::Explicit(Mass::new(value)),
            SweepAxis::Gradient => c.protocol.params.gradient = FieldGradient::new(value),
            SweepAxis::TransferTime => c.protocol.params.transfer_time = Time::new(value),
            SweepAxis::Duration => c.experiment.duration = Time::new(value),
        }
        c
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub reports: Vec<RunReport>,
}

/// Runs the scenario once per value. Points run in parallel; results come
/// back in input order and equal separate [`run`] calls.
pub fn sweep(config: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    let reports = values
        .par_iter()
        .map(|&v| run(&axis.apply(config, v)).map(|o| o.report))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        reports,
    })
}

fn column_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".to_owned(), |x| format!("{x:e}"))
}

impl SweepResult {
    /// One row per value. Crossing times that are never reached and infinite
    /// decoherence times are written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{}_{},theta0_rad,tau_s,deviation_at_duration_rad,pressure_mbar,tau_d_s",
            self.axis.name(),
            self.axis.si_unit().replace(['/', '^', '*'], "")
        );
        if let Some(first) = self.reports.first() {
            for c in &first.dynamics.crossings {
                let l = column_label(&c.label);
                let _ = write!(out, ",crossing_time_s_{l},detectable_{l}");
            }
        }
        out.push('\n');
        for (v, r) in self.values.iter().zip(&self.reports) {
            let _ = write!(
                out,
                "{v:e},{:e},{:e},{:e},{:e},{}",
                r.protocol.theta0_rad,
                r.dynamics.tau_s,
                r.dynamics.deviation_at_duration_rad,
                r.parameters.pressure_mbar,
                opt(r.decoherence.ambient.tau_d),
            );
            for c in &r.dynamics.crossings {
                let ambient = r
                    .verdicts
                    .iter()
                    .find(|x| x.resolution == c.label && x.environment == "ambient")
                    .is_some_and(|x| x.detectable);
                let _ = write!(out, ",{},{ambient}", opt(c.time_s));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<_> = self
            .values
            .iter()
            .zip(&self.reports)
            .map(|(v, r)| serde_json::json!({ "value": v, "report": r }))
            .collect();
        let doc = serde_json::json!({ "axis": self.axis.name(), "points": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("sweep serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_config;

    #[test]
    fn temperature_sweep_orders_tau_d() {
        let c = load_config("sounding_rocket").unwrap();
        let temps = [300.0, 77.0, 4.0, 1.0, 0.1];
        let s = sweep(&c, SweepAxis::ExternalTemperature, &temps).unwrap();
        let tau: Vec<f64> = s
            .reports
            .iter()
            .map(|r| r.decoherence.ambient.decoherence_time())
            .collect();
        assert!(tau.windows(2).all(|w| w[0] < w[1]), "{tau:?}");
        assert_eq!(s.to_csv().lines().count(), 6);
    }

    #[test]
    fn single_value_equals_run() {
        let c = load_config("nominal").unwrap();
        let s = sweep(&c, SweepAxis::Duration, &[4.6]).unwrap();
        let direct = run(&c).unwrap().report;
        assert_eq!(s.reports[0].to_json(), direct.to_json());
    }

    #[test]
    fn sweep_matches_independent_runs() {
        let c = load_config("nominal").unwrap();
        let values = [5e-6, 1e-5, 2e-5];
        let s = sweep(&c, SweepAxis::HalfLength, &values).unwrap();
        for (v, r) in values.iter().zip(&s.reports) {
            let direct = run(&SweepAxis::HalfLength.apply(&c, *v)).unwrap().report;
            assert_eq!(r, &direct);
        }
    }

    #[test]
    fn density_sweep_is_inverse_when_collisions_dominate() {
        let c = load_config("nominal").unwrap();
        let s = sweep(&c, SweepAxis::NumberDensity, &[1e9, 1e11]).unwrap();
        let a = s.reports[0].decoherence.ambient.decoherence_time();
        let b = s.reports[1].decoherence.ambient.decoherence_time();
        assert!((a / b - 100.0).abs() / 100.0 < 1e-3, "{}", a / b);
    }

    #[test]
    fn unknown_axis_lists_valid_ones() {
        let msg = SweepAxis::from_name("colour").unwrap_err().to_string();
        for a in SweepAxis::ALL {
            assert!(msg.contains(a.name()), "{msg}");
        }
    }

    #[test]
    fn values_with_and_without_units() {
        let a = SweepAxis::HalfLength;
        assert_eq!(a.parse_value("10 um").unwrap(), 1e-5);
        assert_eq!(a.parse_value("1e-5").unwrap(), 1e-5);
        assert!(a.parse_value("10 K").is_err());
    }
}
