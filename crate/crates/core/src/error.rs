// SPDX-License-Identifier: Apache-2.0

//! Error types shared across the crate.

use std::fmt;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage an error originated from, attached by [`crate::scenario::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Protocol,
    Dynamics,
    Decoherence,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Protocol => "protocol",
            Stage::Dynamics => "dynamics",
            Stage::Decoherence => "decoherence",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

/// Coarse classification used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Domain,
    Numerical,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Io => 1,
            ErrorClass::Config => 3,
            ErrorClass::Domain => 4,
            ErrorClass::Numerical => 5,
        }
    }
}

/// Last valid integrator state, carried by numerical failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorState {
    /// Rescaled time.
    pub s: f64,
    /// Angle offset from the initial angle, rad.
    pub offset: f64,
    /// Angular velocity in rad per rescaled-time unit.
    pub theta_dot: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error(
        "unreachable superposition angle: branch separation {delta0:e} m exceeds the rod span 2L = {span:e} m"
    )]
    UnreachableAngle { delta0: f64, span: f64 },

    #[error("threshold {resolution:e} rad is not reached: {reason}")]
    UnreachableThreshold { resolution: f64, reason: String },

    #[error("step size underflow at s = {:e} (offset {:e} rad): {reason}", .state.s, .state.offset)]
    StepUnderflow {
        state: IntegratorState,
        reason: String,
    },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn singularity(msg: impl Into<String>) -> Self {
        Error::Singularity(msg.into())
    }

    /// Wraps the error with the stage it came from, unless it already carries one.
    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::UnreachableAngle { .. } => ErrorClass::Domain,
            Error::Singularity(_)
            | Error::UnreachableThreshold { .. }
            | Error::StepUnderflow { .. } => ErrorClass::Numerical,
            Error::Config(ConfigError::Io { .. }) => ErrorClass::Io,
            Error::Config(_) => ErrorClass::Config,
            Error::Io(_) => ErrorClass::Io,
            Error::Stage { source, .. } => source.class(),
        }
    }
}

/// Errors raised while reading a scenario configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("key `{key}`: expected a {expected} quantity, found unit `{found}`")]
    UnitMismatch {
        key: String,
        expected: &'static str,
        found: String,
    },

    #[error("key `{key}`: {message}")]
    InvalidValue { key: String, message: String },

    #[error("schema violation: {}", describe_schema(.missing, .unknown))]
    Schema {
        missing: Vec<String>,
        unknown: Vec<String>,
    },

    #[error("unknown preset or missing file `{0}`")]
    NotFound(String),
}

fn describe_schema(missing: &[String], unknown: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing required keys [{}]", missing.join(", ")));
    }
    if !unknown.is_empty() {
        parts.push(format!("unknown keys [{}]", unknown.join(", ")));
    }
    parts.join("; ")
}
