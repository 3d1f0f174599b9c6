// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::config::{AnisotropySpec, MassSpec, ScenarioConfig};
use super::plot::drop_distance;
use crate::decoherence::{budget, DecoherenceBudget};
use crate::dynamics::{
    characteristic_time, integrate, small_angle_deviation, time_to_threshold, Termination,
    Trajectory,
};
use crate::error::{Error, Result, Stage};
use crate::protocol::{non_overlap_check, validate_timeline, ProtocolPlan, ValidationReport};
use crate::system::{pascal_to_mbar, pressure_from_density, two_sphere_anisotropy};
use crate::units::{Angle, Temperature};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeciesReport {
    pub name: String,
    pub molecular_mass_kg: f64,
    pub fraction: f64,
}

/// Every input of the run, resolved to SI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedParameters {
    pub sphere_radius_m: f64,
    pub half_length_m: f64,
    pub mass_kg: f64,
    pub mass_from_density: bool,
    pub dielectric_re: f64,
    pub dielectric_im: f64,
    pub species: Vec<SpeciesReport>,
    pub number_density_m3: f64,
    pub pressure_pa: f64,
    pub pressure_mbar: f64,
    pub external_temperature_k: f64,
    pub internal_temperature_k: f64,
    pub gradient_t_per_m: f64,
    pub transfer_time_s: f64,
    pub measurement_time_s: f64,
    pub spin_coherence_s: f64,
    pub lande_g: f64,
    pub safety_factor: f64,
    pub wavepacket_width_m: f64,
    pub platform: String,
    pub duration_s: f64,
    pub free_fall_acceleration_m_s2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolSection {
    pub branch_separation_m: f64,
    /// `arcsin(Δ0 / 2L)`.
    pub theta0_transfer_rad: f64,
    /// Angle used by the dynamics and decoherence stages.
    pub theta0_rad: f64,
    pub theta0_overridden: bool,
    pub timeline: ValidationReport,
    pub non_overlap: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub label: String,
    pub resolution_rad: f64,
    /// `None` when the deviation never reaches the resolution.
    pub time_s: Option<f64>,
    pub closed_form_time_s: f64,
    pub closed_form_valid: bool,
    pub unreachable_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsSection {
    pub tau_s: f64,
    pub duration_s: f64,
    pub terminated_by: Termination,
    pub final_time_s: f64,
    pub theta_final_rad: f64,
    pub deviation_at_duration_rad: f64,
    pub small_angle_deviation_rad: f64,
    pub small_angle_valid: bool,
    pub drop_distance_m: f64,
    pub max_relative_energy_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub crossings: Vec<CrossingReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceSection {
    /// At the configured environment temperatures.
    pub ambient: DecoherenceBudget,
    /// At each marked temperature, with `T_E = T_I`.
    pub marked: Vec<DecoherenceBudget>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub resolution: String,
    /// `"ambient"` or the marked temperature in kelvin.
    pub environment: String,
    pub crossing_time_s: Option<f64>,
    pub tau_d_s: Option<f64>,
    pub duration_s: f64,
    pub detectable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub name: Option<String>,
    pub parameters: ResolvedParameters,
    pub protocol: ProtocolSection,
    pub dynamics: DynamicsSection,
    pub decoherence: DecoherenceSection,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl RunReport {
    /// Pretty JSON with a trailing newline. Field order is fixed by the
    /// struct layout, so equal reports give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub trajectory: Trajectory,
}

/// A resolution is detectable iff the deviation reaches it before both the
/// decoherence time and the end of the free evolution.
pub fn is_detectable(crossing_time: Option<f64>, tau_d: Option<f64>, duration: f64) -> bool {
    match crossing_time {
        None => false,
        Some(t) => t < tau_d.unwrap_or(f64::INFINITY).min(duration),
    }
}

pub fn run(config: &ScenarioConfig) -> Result<RunOutput> {
    let stage = |stage| move |e: Error| e.in_stage(stage);

    let rod = config.rod.resolve().map_err(stage(Stage::Config))?;
    let env = config.environment.resolve().map_err(stage(Stage::Config))?;
    let duration = config.experiment.duration;
    let mut notes = Vec::new();

    // protocol
    let p = &config.protocol;
    let plan = ProtocolPlan::resolve(p.params, &rod).map_err(stage(Stage::Protocol))?;
    let timeline = validate_timeline(&p.params, p.safety_factor).map_err(stage(Stage::Protocol))?;
    let theta0 = p.superposition_angle.unwrap_or(plan.theta0);
    let non_overlap = non_overlap_check(
        theta0,
        rod.half_length(),
        rod.sphere_radius(),
        p.wavepacket_width,
    )
    .map_err(stage(Stage::Protocol))?;
    if p.superposition_angle.is_some() {
        notes.push(format!(
            "superposition angle set to {:e} rad by configuration; the transfer formula gives {:e} rad",
            theta0.si(),
            plan.theta0.si()
        ));
    }
    for c in timeline.constraints.iter().chain(&non_overlap.constraints) {
        if !c.passed {
            notes.push(format!(
                "constraint `{}` fails: {:e} vs {:e}",
                c.name, c.lhs, c.rhs
            ));
        }
    }

    // dynamics
    let tau = characteristic_time(rod.half_length(), rod.mass_per_sphere())
        .map_err(stage(Stage::Dynamics))?;
    let dyn_config = config.dynamics.config(theta0);
    let trajectory = integrate(&dyn_config, tau, duration).map_err(stage(Stage::Dynamics))?;
    let small = small_angle_deviation(theta0, tau, duration).map_err(stage(Stage::Dynamics))?;
    if trajectory.terminated_by != Termination::TimeLimit {
        notes.push(format!(
            "integration stopped at the angular guard band ({:?}) before the end of the free evolution",
            trajectory.terminated_by
        ));
    }
    let mut crossings = Vec::new();
    for r in &config.experiment.detection_resolutions {
        let resolution = r.angle(rod.half_length());
        let closed = crate::dynamics::small_angle_crossing_time(theta0, tau, resolution).si();
        let entry = match time_to_threshold(&dyn_config, tau, resolution) {
            Ok(c) => CrossingReport {
                label: r.label.clone(),
                resolution_rad: resolution.si(),
                time_s: Some(c.time),
                closed_form_time_s: c.closed_form_time,
                closed_form_valid: c.closed_form_valid,
                unreachable_reason: None,
            },
            Err(Error::UnreachableThreshold { reason, .. }) => CrossingReport {
                label: r.label.clone(),
                resolution_rad: resolution.si(),
                time_s: None,
                closed_form_time_s: closed,
                closed_form_valid: false,
                unreachable_reason: Some(reason),
            },
            Err(e) => return Err(e.in_stage(Stage::Dynamics)),
        };
        crossings.push(entry);
    }
    let last = trajectory.final_sample();
    let g = config.experiment.free_fall_acceleration;

    // decoherence
    let anisotropy = match config.experiment.anisotropy {
        AnisotropySpec::None => None,
        AnisotropySpec::TwoSphere => {
            Some(two_sphere_anisotropy(&rod).map_err(stage(Stage::Decoherence))?)
        }
        AnisotropySpec::Explicit { alpha_x, alpha_z } => Some((alpha_x, alpha_z)),
    };
    let model = config.environment.collision_model;
    let ambient =
        budget(&rod, &env, theta0, anisotropy, model).map_err(stage(Stage::Decoherence))?;
    let mut marked = Vec::new();
    for &t in &config.experiment.temperatures_to_mark {
        let env_t = env
            .at_temperatures(t, t)
            .map_err(stage(Stage::Decoherence))?;
        marked.push(
            budget(&rod, &env_t, theta0, anisotropy, model).map_err(stage(Stage::Decoherence))?,
        );
    }

    // verdicts
    let mut verdicts = Vec::new();
    for c in &crossings {
        let environments = std::iter::once(("ambient".to_owned(), &ambient)).chain(
            config
                .experiment
                .temperatures_to_mark
                .iter()
                .zip(&marked)
                .map(|(t, b)| (format_temperature(*t), b)),
        );
        for (label, b) in environments {
            verdicts.push(Verdict {
                resolution: c.label.clone(),
                environment: label,
                crossing_time_s: c.time_s,
                tau_d_s: b.tau_d,
                duration_s: duration.si(),
                detectable: is_detectable(c.time_s, b.tau_d, duration.si()),
            });
        }
    }

    let pressure = pressure_from_density(env.number_density(), env.external_temperature())
        .map_err(stage(Stage::Config))?;
    let parameters = ResolvedParameters {
        sphere_radius_m: rod.sphere_radius().si(),
        half_length_m: rod.half_length().si(),
        mass_kg: rod.mass_per_sphere().si(),
        mass_from_density: matches!(config.rod.mass, MassSpec::Density(_)),
        dielectric_re: rod.dielectric().re,
        dielectric_im: rod.dielectric().im,
        species: env
            .species()
            .iter()
            .map(|s| SpeciesReport {
                name: s.name.clone(),
                molecular_mass_kg: s.molecular_mass.si(),
                fraction: s.fraction,
            })
            .collect(),
        number_density_m3: env.number_density().si(),
        pressure_pa: pressure.si(),
        pressure_mbar: pascal_to_mbar(pressure),
        external_temperature_k: env.external_temperature().si(),
        internal_temperature_k: env.internal_temperature().si(),
        gradient_t_per_m: p.params.gradient.si(),
        transfer_time_s: p.params.transfer_time.si(),
        measurement_time_s: p.params.measurement_time.si(),
        spin_coherence_s: p.params.spin_coherence.si(),
        lande_g: p.params.lande_g,
        safety_factor: p.safety_factor,
        wavepacket_width_m: p.wavepacket_width.si(),
        platform: config.experiment.platform.name().to_owned(),
        duration_s: duration.si(),
        free_fall_acceleration_m_s2: g.si(),
    };

    let report = RunReport {
        name: config.name.clone(),
        parameters,
        protocol: ProtocolSection {
            branch_separation_m: plan.delta0.si(),
            theta0_transfer_rad: plan.theta0.si(),
            theta0_rad: theta0.si(),
            theta0_overridden: p.superposition_angle.is_some(),
            timeline,
            non_overlap,
        },
        dynamics: DynamicsSection {
            tau_s: tau.si(),
            duration_s: duration.si(),
            terminated_by: trajectory.terminated_by,
            final_time_s: last.t,
            theta_final_rad: last.theta,
            deviation_at_duration_rad: last.deviation,
            small_angle_deviation_rad: small.deviation,
            small_angle_valid: small.valid,
            drop_distance_m: drop_distance(duration, g).si(),
            max_relative_energy_drift: trajectory.max_relative_energy_drift(),
            accepted_steps: trajectory.accepted_steps,
            rejected_steps: trajectory.rejected_steps,
            crossings,
        },
        decoherence: DecoherenceSection { ambient, marked },
        verdicts,
        notes,
    };
    Ok(RunOutput { report, trajectory })
}

pub(crate) fn format_temperature(t: Temperature) -> String {
    format!("{} K", t.si())
}

/// Angle actually used downstream: the configured override or the transfer value.
pub fn superposition_angle_of(config: &ScenarioConfig) -> Result<Angle> {
    if let Some(a) = config.protocol.superposition_angle {
        return Ok(a);
    }
    let rod = config.rod.resolve()?;
    Ok(ProtocolPlan::resolve(config.protocol.params, &rod)?.theta0)
}
