// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration files.
//!
//! Configurations are TOML documents whose physical values are strings with
//! a unit suffix (`"7.92 nm"`, `"1e6 T/m"`, `"4e-14 mbar"`). Everything is
//! normalized to SI on load. Unknown keys are rejected, and a file missing
//! required keys is reported with the complete list of what is missing.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use toml::{Table, Value};

use super::presets;
use crate::decoherence::CollisionModel;
use crate::dynamics::{DynamicsConfig, GuardBand, Sampling};
use crate::error::{ConfigError, Result};
use crate::protocol::ProtocolParams;
use crate::system::{density_from_pressure, mass_from_density, Environment, GasSpecies, Nanorod};
use crate::units::{
    Acceleration, Angle, FieldGradient, Length, Mass, MassDensity, NumberDensity, Polarizability,
    Pressure, Quantity, Temperature, Time, UnitParseError,
};

/// Experiment platform; each fixes a default free-evolution time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Platform {
    TableTop,
    DropTower,
    SoundingRocket,
    Space,
    Custom,
}

impl Platform {
    pub const ALL: [Platform; 5] = [
        Platform::TableTop,
        Platform::DropTower,
        Platform::SoundingRocket,
        Platform::Space,
        Platform::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Platform::TableTop => "table_top",
            Platform::DropTower => "drop_tower",
            Platform::SoundingRocket => "sounding_rocket",
            Platform::Space => "space",
            Platform::Custom => "custom",
        }
    }

    /// Default free-evolution time. Only the drop-tower value (Bremen,
    /// 4.6 s) is an established facility figure; the others are round
    /// numbers for the respective regime.
    pub fn default_duration(self) -> Option<Time> {
        match self {
            Platform::TableTop => Some(Time::new(0.1)),
            Platform::DropTower => Some(Time::new(4.6)),
            Platform::SoundingRocket => Some(Time::new(60.0)),
            Platform::Space => Some(Time::new(1000.0)),
            Platform::Custom => None,
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSpec {
    /// Mass of each sphere given directly.
    Explicit(Mass),
    /// Mass derived from the sphere radius and a material density.
    Density(MassDensity),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RodSpec {
    pub sphere_radius: Length,
    pub half_length: Length,
    pub mass: MassSpec,
    pub dielectric: Complex64,
}

impl RodSpec {
    pub fn resolve(&self) -> Result<Nanorod> {
        let mass = match self.mass {
            MassSpec::Explicit(m) => m,
            MassSpec::Density(rho) => mass_from_density(self.sphere_radius, rho)?,
        };
        Nanorod::new(self.sphere_radius, self.half_length, mass, self.dielectric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentSpec {
    pub species: Vec<GasSpecies>,
    pub number_density: NumberDensity,
    pub external_temperature: Temperature,
    /// `None` keeps the rod in equilibrium with the environment.
    pub internal_temperature: Option<Temperature>,
    pub collision_model: CollisionModel,
}

impl EnvironmentSpec {
    pub fn resolve(&self) -> Result<Environment> {
        Environment::new(
            self.species.clone(),
            self.number_density,
            self.external_temperature,
            self.internal_temperature
                .unwrap_or(self.external_temperature),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolSpec {
    pub params: ProtocolParams,
    pub safety_factor: f64,
    pub wavepacket_width: Length,
    /// Superposition angle to use downstream instead of the transfer-formula
    /// value; the report notes the difference.
    pub superposition_angle: Option<Angle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsSpec {
    pub tolerance: f64,
    pub max_step: Option<f64>,
    pub initial_angular_velocity: f64,
    pub guard: GuardBand,
    pub sampling: Sampling,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        let base = DynamicsConfig::new(Angle::new(0.1));
        DynamicsSpec {
            tolerance: base.tolerance,
            max_step: base.max_step,
            initial_angular_velocity: base.initial_angular_velocity,
            guard: base.guard,
            sampling: base.sampling,
        }
    }
}

impl DynamicsSpec {
    pub fn config(&self, theta0: Angle) -> DynamicsConfig {
        DynamicsConfig {
            theta0,
            initial_angular_velocity: self.initial_angular_velocity,
            tolerance: self.tolerance,
            max_step: self.max_step,
            guard: self.guard,
            sampling: self.sampling,
        }
    }
}

/// A readout resolution, as an angle or as a displacement of the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionValue {
    Angle(Angle),
    Displacement(Length),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionResolution {
    pub label: String,
    pub value: ResolutionValue,
}

impl DetectionResolution {
    /// Angular resolution; a displacement `Δx` becomes `Δx / L`.
    pub fn angle(&self, half_length: Length) -> Angle {
        match self.value {
            ResolutionValue::Angle(a) => a,
            ResolutionValue::Displacement(dx) => Angle::new(dx.si() / half_length.si()),
        }
    }

    pub fn levitated_default() -> Self {
        DetectionResolution {
            label: "levitated optomechanics".into(),
            value: ResolutionValue::Displacement(Length::new(1e-15)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnisotropySpec {
    /// No anisotropic scattering estimate.
    None,
    /// Dipole-coupled two-sphere estimate from the rod geometry.
    TwoSphere,
    Explicit {
        alpha_x: Polarizability,
        alpha_z: Polarizability,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub platform: Platform,
    pub duration: Time,
    pub free_fall_acceleration: Acceleration,
    pub detection_resolutions: Vec<DetectionResolution>,
    pub temperatures_to_mark: Vec<Temperature>,
    pub anisotropy: AnisotropySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OutputSpec {
    pub directory: Option<String>,
    pub formats: Vec<OutputFormat>,
}

/// A fully resolved scenario, all values in SI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub rod: RodSpec,
    pub environment: EnvironmentSpec,
    pub protocol: ProtocolSpec,
    pub dynamics: DynamicsSpec,
    pub experiment: ExperimentSpec,
    pub output: OutputSpec,
}

/// Loads a configuration from a file path, or from a built-in preset when
/// no file of that name exists.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        return parse_config(&text);
    }
    let name = path.to_string_lossy();
    match presets::get(&name) {
        Some(text) => parse_config(text),
        None => Err(ConfigError::NotFound(name.into_owned()).into()),
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let table: Table = text.parse::<Table>().map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_column(text, span.start))
            .unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            message: e.message().trim().to_owned(),
        }
    })?;
    Reader::default().read(&table)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

struct Section<'a> {
    path: String,
    table: Option<&'a Table>,
    seen: Vec<&'a str>,
}

#[derive(Default)]
struct Reader {
    missing: Vec<String>,
    unknown: Vec<String>,
    invalid: Vec<ConfigError>,
}

impl<'a> Section<'a> {
    fn root(table: &'a Table) -> Self {
        Section {
            path: String::new(),
            table: Some(table),
            seen: Vec::new(),
        }
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn raw(&mut self, key: &'a str) -> Option<&'a Value> {
        self.seen.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn child(&mut self, r: &mut Reader, key: &'a str) -> Section<'a> {
        let path = self.key_path(key);
        let table = match self.raw(key) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                r.invalid(&path, "expected a table");
                None
            }
            None => None,
        };
        Section {
            path,
            table,
            seen: Vec::new(),
        }
    }

    fn finish(self, r: &mut Reader) {
        if let Some(table) = self.table {
            for key in table.keys() {
                if !self.seen.contains(&key.as_str()) {
                    r.unknown.push(self.key_path(key));
                }
            }
        }
    }

    fn quantity<Q: Quantity>(&mut self, r: &mut Reader, key: &'a str, required: bool) -> Option<Q> {
        let path = self.key_path(key);
        match self.raw(key) {
            None => {
                if required {
                    r.missing.push(path);
                }
                None
            }
            Some(Value::String(s)) => match Q::parse(s) {
                Ok(q) => Some(q),
                Err(UnitParseError::WrongDimension { expected, found }) => {
                    r.invalid.push(ConfigError::UnitMismatch {
                        key: path,
                        expected,
                        found,
                    });
                    None
                }
                Err(e) => {
                    r.invalid(&path, &e.to_string());
                    None
                }
            },
            Some(_) => {
                r.invalid(
                    &path,
                    &format!("expected a string like \"1.0 {}\"", Q::SI_UNIT),
                );
                None
            }
        }
    }

    fn number(&mut self, r: &mut Reader, key: &'a str, required: bool) -> Option<f64> {
        let path = self.key_path(key);
        match self.raw(key) {
            None => {
                if required {
                    r.missing.push(path);
                }
                None
            }
            Some(Value::Float(f)) => Some(*f),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                r.invalid(&path, "expected a number");
                None
            }
        }
    }

    fn integer(&mut self, r: &mut Reader, key: &'a str) -> Option<i64> {
        let path = self.key_path(key);
        match self.raw(key) {
            None => None,
            Some(Value::Integer(i)) => Some(*i),
            Some(_) => {
                r.invalid(&path, "expected an integer");
                None
            }
        }
    }

    fn string(&mut self, r: &mut Reader, key: &'a str, required: bool) -> Option<&'a str> {
        let path = self.key_path(key);
        match self.raw(key) {
            None => {
                if required {
                    r.missing.push(path);
                }
                None
            }
            Some(Value::String(s)) => Some(s.as_str()),
            Some(_) => {
                r.invalid(&path, "expected a string");
                None
            }
        }
    }

    fn array(&mut self, r: &mut Reader, key: &'a str, required: bool) -> Option<&'a Vec<Value>> {
        let path = self.key_path(key);
        match self.raw(key) {
            None => {
                if required {
                    r.missing.push(path);
                }
                None
            }
            Some(Value::Array(a)) => Some(a),
            Some(_) => {
                r.invalid(&path, "expected an array");
                None
            }
        }
    }

    /// Array of tables, each read as its own section.
    fn tables(&mut self, r: &mut Reader, key: &'a str, required: bool) -> Option<Vec<Section<'a>>> {
        let path = self.key_path(key);
        let items = self.array(r, key, required)?;
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match item {
                Value::Table(t) => out.push(Section {
                    path: format!("{path}[{i}]"),
                    table: Some(t),
                    seen: Vec::new(),
                }),
                _ => r.invalid(&format!("{path}[{i}]"), "expected a table"),
            }
        }
        Some(out)
    }
}

impl Reader {
    fn invalid(&mut self, key: &str, message: &str) {
        self.invalid.push(ConfigError::InvalidValue {
            key: key.to_owned(),
            message: message.to_owned(),
        });
    }

    fn read(mut self, table: &Table) -> Result<ScenarioConfig> {
        let mut root = Section::root(table);
        let name = root.string(&mut self, "name", false).map(str::to_owned);

        let mut rod = root.child(&mut self, "rod");
        let rod_spec = self.read_rod(&mut rod);
        rod.finish(&mut self);

        let mut env = root.child(&mut self, "environment");
        let env_spec = self.read_environment(&mut env);
        env.finish(&mut self);

        let mut protocol = root.child(&mut self, "protocol");
        let protocol_spec = self.read_protocol(&mut protocol);
        protocol.finish(&mut self);

        let mut dynamics = root.child(&mut self, "dynamics");
        let dynamics_spec = self.read_dynamics(&mut dynamics);
        dynamics.finish(&mut self);

        let mut experiment = root.child(&mut self, "experiment");
        let experiment_spec = self.read_experiment(&mut experiment);
        experiment.finish(&mut self);

        let mut output = root.child(&mut self, "output");
        let output_spec = self.read_output(&mut output);
        output.finish(&mut self);

        root.finish(&mut self);

        if !self.missing.is_empty() || !self.unknown.is_empty() {
            return Err(ConfigError::Schema {
                missing: self.missing,
                unknown: self.unknown,
            }
            .into());
        }
        if let Some(first) = self.invalid.into_iter().next() {
            return Err(first.into());
        }
        const CHECKED: &str = "presence checked before assembly";
        Ok(ScenarioConfig {
            name,
            rod: rod_spec.expect(CHECKED),
            environment: env_spec.expect(CHECKED),
            protocol: protocol_spec.expect(CHECKED),
            dynamics: dynamics_spec.expect(CHECKED),
            experiment: experiment_spec.expect(CHECKED),
            output: output_spec.expect(CHECKED),
        })
    }

    fn read_rod(&mut self, s: &mut Section<'_>) -> Option<RodSpec> {
        let sphere_radius = s.quantity::<Length>(self, "sphere_radius", true);
        let half_length = s.quantity::<Length>(self, "half_length", true);
        let mass = match (s.has("mass"), s.has("density")) {
            (true, true) => {
                self.invalid(
                    &s.key_path("mass"),
                    "give either `mass` or `density`, not both",
                );
                None
            }
            (false, true) => s
                .quantity::<MassDensity>(self, "density", true)
                .map(MassSpec::Density),
            _ => {
                s.seen.push("density");
                s.quantity::<Mass>(self, "mass", true)
                    .map(MassSpec::Explicit)
            }
        };
        let dielectric = match s.raw("dielectric") {
            None => {
                self.missing.push(s.key_path("dielectric"));
                None
            }
            Some(Value::Float(re)) => Some(Complex64::new(*re, 0.0)),
            Some(Value::Integer(re)) => Some(Complex64::new(*re as f64, 0.0)),
            Some(Value::Table(t)) => {
                let mut inner = Section {
                    path: s.key_path("dielectric"),
                    table: Some(t),
                    seen: Vec::new(),
                };
                let re = inner.number(self, "re", true);
                let im = inner.number(self, "im", false).unwrap_or(0.0);
                inner.finish(self);
                re.map(|re| Complex64::new(re, im))
            }
            Some(_) => {
                self.invalid(&s.key_path("dielectric"), "expected a number or { re, im }");
                None
            }
        };
        Some(RodSpec {
            sphere_radius: sphere_radius?,
            half_length: half_length?,
            mass: mass?,
            dielectric: dielectric?,
        })
    }

    fn read_environment(&mut self, s: &mut Section<'_>) -> Option<EnvironmentSpec> {
        let external = s.quantity::<Temperature>(self, "external_temperature", true);
        let internal = s.quantity::<Temperature>(self, "internal_temperature", false);
        let density = match (s.has("number_density"), s.has("pressure")) {
            (true, true) => {
                self.invalid(
                    &s.key_path("number_density"),
                    "give either `number_density` or `pressure`, not both",
                );
                None
            }
            (false, true) => {
                let p = s.quantity::<Pressure>(self, "pressure", true);
                match (p, external) {
                    (Some(p), Some(t)) => match density_from_pressure(p, t) {
                        Ok(n) => Some(n),
                        Err(e) => {
                            self.invalid(&s.key_path("pressure"), &e.to_string());
                            None
                        }
                    },
                    _ => None,
                }
            }
            _ => {
                s.seen.push("pressure");
                s.quantity::<NumberDensity>(self, "number_density", true)
            }
        };
        let collision_model = match s.string(self, "collision_model", false) {
            None | Some("per_species") => Some(CollisionModel::PerSpecies),
            Some("averaged_mass") => Some(CollisionModel::AveragedMass),
            Some(other) => {
                self.invalid(
                    &s.key_path("collision_model"),
                    &format!("`{other}` is not one of per_species, averaged_mass"),
                );
                None
            }
        };
        let mut species = Vec::new();
        let mut species_ok = true;
        match s.tables(self, "species", true) {
            Some(sections) => {
                for mut item in sections {
                    let name = item.string(self, "name", true);
                    let mass = item.quantity::<Mass>(self, "molecular_mass", true);
                    let fraction = item.number(self, "fraction", true);
                    match (name, mass, fraction) {
                        (Some(n), Some(m), Some(f)) => match GasSpecies::new(n, m, f) {
                            Ok(sp) => species.push(sp),
                            Err(e) => {
                                self.invalid(&item.path, &e.to_string());
                                species_ok = false;
                            }
                        },
                        _ => species_ok = false,
                    }
                    item.finish(self);
                }
            }
            None => species_ok = false,
        }
        if !species_ok {
            return None;
        }
        Some(EnvironmentSpec {
            species,
            number_density: density?,
            external_temperature: external?,
            internal_temperature: internal,
            collision_model: collision_model?,
        })
    }

    fn read_protocol(&mut self, s: &mut Section<'_>) -> Option<ProtocolSpec> {
        let defaults = ProtocolParams::default();
        let gradient = s.quantity::<FieldGradient>(self, "gradient", true);
        let transfer_time = s.quantity::<Time>(self, "transfer_time", true);
        let spin_coherence = s.quantity::<Time>(self, "spin_coherence", true);
        let measurement_time = s
            .quantity::<Time>(self, "measurement_time", false)
            .unwrap_or(defaults.measurement_time);
        let lande_g = s.number(self, "lande_g", false).unwrap_or(defaults.lande_g);
        let safety_factor = s.number(self, "safety_factor", false).unwrap_or(1.0);
        let wavepacket_width = s
            .quantity::<Length>(self, "wavepacket_width", false)
            .unwrap_or(Length::ZERO);
        let superposition_angle = s.quantity::<Angle>(self, "superposition_angle", false);
        Some(ProtocolSpec {
            params: ProtocolParams {
                gradient: gradient?,
                transfer_time: transfer_time?,
                measurement_time,
                spin_coherence: spin_coherence?,
                lande_g,
            },
            safety_factor,
            wavepacket_width,
            superposition_angle,
        })
    }

    fn read_dynamics(&mut self, s: &mut Section<'_>) -> Option<DynamicsSpec> {
        let defaults = DynamicsSpec::default();
        let tolerance = s
            .number(self, "tolerance", false)
            .unwrap_or(defaults.tolerance);
        let max_step = s.number(self, "max_step", false);
        let initial_angular_velocity = s
            .number(self, "initial_angular_velocity", false)
            .unwrap_or(defaults.initial_angular_velocity);
        let floor = s
            .quantity::<Angle>(self, "guard_floor", false)
            .map_or(defaults.guard.floor, Angle::si);
        let ceiling = s
            .quantity::<Angle>(self, "guard_ceiling", false)
            .map_or(defaults.guard.ceiling, Angle::si);
        let samples = s.integer(self, "samples");
        let start = s.number(self, "sample_start_fraction", false);
        let sampling = match s.string(self, "sampling", false) {
            None | Some("logarithmic") => {
                let Sampling::Logarithmic {
                    count,
                    start_fraction,
                } = Sampling::default()
                else {
                    unreachable!("default sampling is logarithmic")
                };
                Some(Sampling::Logarithmic {
                    count: samples.map_or(count, |n| n.max(0) as usize),
                    start_fraction: start.unwrap_or(start_fraction),
                })
            }
            Some("linear") => {
                if start.is_some() {
                    self.invalid(
                        &s.key_path("sample_start_fraction"),
                        "only used with logarithmic sampling",
                    );
                }
                Some(Sampling::Linear {
                    count: samples.map_or(201, |n| n.max(0) as usize),
                })
            }
            Some(other) => {
                self.invalid(
                    &s.key_path("sampling"),
                    &format!("`{other}` is not one of logarithmic, linear"),
                );
                None
            }
        };
        Some(DynamicsSpec {
            tolerance,
            max_step,
            initial_angular_velocity,
            guard: GuardBand { floor, ceiling },
            sampling: sampling?,
        })
    }

    fn read_experiment(&mut self, s: &mut Section<'_>) -> Option<ExperimentSpec> {
        let platform = match s.string(self, "platform", false) {
            None => Some(Platform::Custom),
            Some(name) => {
                let p = Platform::from_name(name);
                if p.is_none() {
                    let names: Vec<_> = Platform::ALL.iter().map(|p| p.name()).collect();
                    self.invalid(
                        &s.key_path("platform"),
                        &format!("`{name}` is not one of {}", names.join(", ")),
                    );
                }
                p
            }
        };
        let explicit = s.quantity::<Time>(self, "duration", false);
        let duration = match (explicit, platform) {
            (Some(d), _) => Some(d),
            (None, Some(p)) => match p.default_duration() {
                Some(d) => Some(d),
                None => {
                    self.missing.push(s.key_path("duration"));
                    None
                }
            },
            (None, None) => None,
        };
        let free_fall_acceleration = s
            .quantity::<Acceleration>(self, "free_fall_acceleration", false)
            .unwrap_or(Acceleration::new(crate::constants::STANDARD_FREE_FALL));

        let mut resolutions = Vec::new();
        match s.tables(self, "detection_resolutions", false) {
            None => {
                if !s.has("detection_resolutions") {
                    resolutions.push(DetectionResolution::levitated_default());
                }
            }
            Some(sections) => {
                for mut item in sections {
                    let label = item.string(self, "label", true).map(str::to_owned);
                    let value = match (item.has("angle"), item.has("displacement")) {
                        (true, false) => item
                            .quantity::<Angle>(self, "angle", true)
                            .map(ResolutionValue::Angle),
                        (false, true) => item
                            .quantity::<Length>(self, "displacement", true)
                            .map(ResolutionValue::Displacement),
                        _ => {
                            self.invalid(
                                &item.path,
                                "give exactly one of `angle` or `displacement`",
                            );
                            item.seen.extend(["angle", "displacement"]);
                            None
                        }
                    };
                    if let (Some(label), Some(value)) = (label, value) {
                        resolutions.push(DetectionResolution { label, value });
                    }
                    item.finish(self);
                }
            }
        }

        let mut temperatures = Vec::new();
        if let Some(items) = s.array(self, "temperatures_to_mark", false) {
            for (i, item) in items.iter().enumerate() {
                let key = format!("{}[{i}]", s.key_path("temperatures_to_mark"));
                match item.as_str().map(Temperature::parse) {
                    Some(Ok(t)) => temperatures.push(t),
                    Some(Err(UnitParseError::WrongDimension { expected, found })) => {
                        self.invalid.push(ConfigError::UnitMismatch {
                            key,
                            expected,
                            found,
                        })
                    }
                    Some(Err(e)) => self.invalid(&key, &e.to_string()),
                    None => self.invalid(&key, "expected a string like \"4 K\""),
                }
            }
        }

        let anisotropy = match s.raw("anisotropy") {
            None => Some(AnisotropySpec::TwoSphere),
            Some(Value::String(v)) if v == "two_sphere" => Some(AnisotropySpec::TwoSphere),
            Some(Value::String(v)) if v == "none" => Some(AnisotropySpec::None),
            Some(Value::Table(t)) => {
                let mut inner = Section {
                    path: s.key_path("anisotropy"),
                    table: Some(t),
                    seen: Vec::new(),
                };
                let ax = inner.quantity::<Polarizability>(self, "alpha_x", true);
                let az = inner.quantity::<Polarizability>(self, "alpha_z", true);
                inner.finish(self);
                match (ax, az) {
                    (Some(alpha_x), Some(alpha_z)) => {
                        Some(AnisotropySpec::Explicit { alpha_x, alpha_z })
                    }
                    _ => None,
                }
            }
            Some(_) => {
                self.invalid(
                    &s.key_path("anisotropy"),
                    "expected \"two_sphere\", \"none\" or { alpha_x, alpha_z }",
                );
                None
            }
        };

        let duration = duration?;
        if !(duration.si() > 0.0) {
            self.invalid(&s.key_path("duration"), "must be positive");
        }
        for r in &resolutions {
            let positive = match r.value {
                ResolutionValue::Angle(a) => a.si() > 0.0,
                ResolutionValue::Displacement(d) => d.si() > 0.0,
            };
            if !positive {
                self.invalid(
                    &s.key_path("detection_resolutions"),
                    &format!("`{}` must be positive", r.label),
                );
            }
        }
        Some(ExperimentSpec {
            platform: platform?,
            duration,
            free_fall_acceleration,
            detection_resolutions: resolutions,
            temperatures_to_mark: temperatures,
            anisotropy: anisotropy?,
        })
    }

    fn read_output(&mut self, s: &mut Section<'_>) -> Option<OutputSpec> {
        let directory = s.string(self, "directory", false).map(str::to_owned);
        let mut formats = Vec::new();
        if let Some(items) = s.array(self, "formats", false) {
            for item in items {
                match item.as_str() {
                    Some("json") => formats.push(OutputFormat::Json),
                    Some("csv") => formats.push(OutputFormat::Csv),
                    _ => self.invalid(
                        &s.key_path("formats"),
                        "entries must be \"json\" or \"csv\"",
                    ),
                }
            }
        }
        Some(OutputSpec { directory, formats })
    }
}

fn qty<Q: Quantity>(q: Q) -> Value {
    Value::String(q.to_si_string())
}

impl ScenarioConfig {
    /// Writes the configuration back out in SI units. Parsing the result
    /// gives back an identical configuration.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        if let Some(name) = &self.name {
            root.insert("name".into(), Value::String(name.clone()));
        }

        let mut rod = Table::new();
        rod.insert("sphere_radius".into(), qty(self.rod.sphere_radius));
        rod.insert("half_length".into(), qty(self.rod.half_length));
        match self.rod.mass {
            MassSpec::Explicit(m) => rod.insert("mass".into(), qty(m)),
            MassSpec::Density(rho) => rod.insert("density".into(), qty(rho)),
        };
        let mut eps = Table::new();
        eps.insert("re".into(), Value::Float(self.rod.dielectric.re));
        eps.insert("im".into(), Value::Float(self.rod.dielectric.im));
        rod.insert("dielectric".into(), Value::Table(eps));
        root.insert("rod".into(), Value::Table(rod));

        let e = &self.environment;
        let mut env = Table::new();
        env.insert("number_density".into(), qty(e.number_density));
        env.insert("external_temperature".into(), qty(e.external_temperature));
        if let Some(t) = e.internal_temperature {
            env.insert("internal_temperature".into(), qty(t));
        }
        let model = match e.collision_model {
            CollisionModel::PerSpecies => "per_species",
            CollisionModel::AveragedMass => "averaged_mass",
        };
        env.insert("collision_model".into(), Value::String(model.into()));
        let species = e
            .species
            .iter()
            .map(|sp| {
                let mut t = Table::new();
                t.insert("name".into(), Value::String(sp.name.clone()));
                t.insert("molecular_mass".into(), qty(sp.molecular_mass));
                t.insert("fraction".into(), Value::Float(sp.fraction));
                Value::Table(t)
            })
            .collect();
        env.insert("species".into(), Value::Array(species));
        root.insert("environment".into(), Value::Table(env));

        let p = &self.protocol;
        let mut protocol = Table::new();
        protocol.insert("gradient".into(), qty(p.params.gradient));
        protocol.insert("transfer_time".into(), qty(p.params.transfer_time));
        protocol.insert("measurement_time".into(), qty(p.params.measurement_time));
        protocol.insert("spin_coherence".into(), qty(p.params.spin_coherence));
        protocol.insert("lande_g".into(), Value::Float(p.params.lande_g));
        protocol.insert("safety_factor".into(), Value::Float(p.safety_factor));
        protocol.insert("wavepacket_width".into(), qty(p.wavepacket_width));
        if let Some(a) = p.superposition_angle {
            protocol.insert("superposition_angle".into(), qty(a));
        }
        root.insert("protocol".into(), Value::Table(protocol));

        let d = &self.dynamics;
        let mut dynamics = Table::new();
        dynamics.insert("tolerance".into(), Value::Float(d.tolerance));
        if let Some(h) = d.max_step {
            dynamics.insert("max_step".into(), Value::Float(h));
        }
        dynamics.insert(
            "initial_angular_velocity".into(),
            Value::Float(d.initial_angular_velocity),
        );
        dynamics.insert("guard_floor".into(), qty(Angle::new(d.guard.floor)));
        dynamics.insert("guard_ceiling".into(), qty(Angle::new(d.guard.ceiling)));
        match d.sampling {
            Sampling::Linear { count } => {
                dynamics.insert("sampling".into(), Value::String("linear".into()));
                dynamics.insert("samples".into(), Value::Integer(count as i64));
            }
            Sampling::Logarithmic {
                count,
                start_fraction,
            } => {
                dynamics.insert("sampling".into(), Value::String("logarithmic".into()));
                dynamics.insert("samples".into(), Value::Integer(count as i64));
                dynamics.insert("sample_start_fraction".into(), Value::Float(start_fraction));
            }
        }
        root.insert("dynamics".into(), Value::Table(dynamics));

        let x = &self.experiment;
        let mut experiment = Table::new();
        experiment.insert("platform".into(), Value::String(x.platform.name().into()));
        experiment.insert("duration".into(), qty(x.duration));
        experiment.insert(
            "free_fall_acceleration".into(),
            qty(x.free_fall_acceleration),
        );
        let resolutions = x
            .detection_resolutions
            .iter()
            .map(|r| {
                let mut t = Table::new();
                t.insert("label".into(), Value::String(r.label.clone()));
                match r.value {
                    ResolutionValue::Angle(a) => t.insert("angle".into(), qty(a)),
                    ResolutionValue::Displacement(dx) => t.insert("displacement".into(), qty(dx)),
                };
                Value::Table(t)
            })
            .collect();
        experiment.insert("detection_resolutions".into(), Value::Array(resolutions));
        experiment.insert(
            "temperatures_to_mark".into(),
            Value::Array(x.temperatures_to_mark.iter().map(|&t| qty(t)).collect()),
        );
        let anisotropy = match x.anisotropy {
            AnisotropySpec::None => Value::String("none".into()),
            AnisotropySpec::TwoSphere => Value::String("two_sphere".into()),
            AnisotropySpec::Explicit { alpha_x, alpha_z } => {
                let mut t = Table::new();
                t.insert("alpha_x".into(), qty(alpha_x));
                t.insert("alpha_z".into(), qty(alpha_z));
                Value::Table(t)
            }
        };
        experiment.insert("anisotropy".into(), anisotropy);
        root.insert("experiment".into(), Value::Table(experiment));

        let o = &self.output;
        if o.directory.is_some() || !o.formats.is_empty() {
            let mut output = Table::new();
            if let Some(dir) = &o.directory {
                output.insert("directory".into(), Value::String(dir.clone()));
            }
            let formats = o
                .formats
                .iter()
                .map(|f| {
                    Value::String(match f {
                        OutputFormat::Json => "json".into(),
                        OutputFormat::Csv => "csv".into(),
                    })
                })
                .collect();
            output.insert("formats".into(), Value::Array(formats));
            root.insert("output".into(), Value::Table(output));
        }

        toml::to_string(&root).expect("a TOML table always serializes")
    }
}
