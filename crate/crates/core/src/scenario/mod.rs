// SPDX-License-Identifier: Apache-2.0

//! Whole-experiment runs: configuration files, reports, parameter sweeps,
//! plot data and reference-value cross-checks.

mod claims;
mod config;
mod plot;
pub mod presets;
mod run;
mod sweep;

pub use claims::{
    check_claims, claims_to_csv, claims_to_json, claims_to_text, Claim, ClaimStatus, Tolerance,
};
pub use config::{
    load_config, parse_config, AnisotropySpec, DetectionResolution, DynamicsSpec, EnvironmentSpec,
    ExperimentSpec, MassSpec, OutputFormat, OutputSpec, Platform, ProtocolSpec, ResolutionValue,
    RodSpec, ScenarioConfig,
};
pub use plot::{
    drop_distance, plot_data, PlotBundle, PlotManifest, CLASSICAL_FILE, MANIFEST_FILE,
    QUANTUM_FILE, SVG_FILE,
};
pub use run::{
    is_detectable, run, superposition_angle_of, CrossingReport, DecoherenceSection,
    DynamicsSection, ProtocolSection, ResolvedParameters, RunOutput, RunReport, Verdict,
};
pub use sweep::{sweep, SweepAxis, SweepResult};
