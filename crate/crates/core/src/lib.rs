// SPDX-License-Identifier: Apache-2.0

//! Simulation of a levitated quantum torsion balance.
//!
//! A nanorod (two spheres on a rigid bar) is put into a superposition of two
//! angular orientations. If gravity is classical, the two branches attract
//! each other and the angle between them shrinks; if gravity is quantum, it
//! stays put. This crate computes
//!
//! * the preparation parameters ([`protocol`]): branch separation, the
//!   initial superposition angle and the timing budget,
//! * the classical-gravity evolution of the angle ([`dynamics`]),
//! * the environmental decoherence budget ([`decoherence`]),
//! * and whole-experiment reports, sweeps and plot data ([`scenario`]).
//!
//! ```
//! use torsion_balance::dynamics::{characteristic_time, small_angle_deviation};
//! use torsion_balance::units::{Angle, Length, Mass, Time};
//!
//! let tau = characteristic_time(Length::new(10e-6), Mass::new(1e-20)).unwrap();
//! let dev = small_angle_deviation(Angle::new(7.92e-4), tau, Time::new(2.5)).unwrap();
//! assert!(dev.valid);
//! assert!((dev.deviation - 6.65e-9).abs() < 1e-11);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod decoherence;
pub mod dynamics;
pub mod error;
pub mod protocol;
pub mod scenario;
pub mod system;
pub mod units;

pub use error::{Error, Result};

// Chapters of the guide under `book/`, compiled as doc-tests so the snippets
// stay in sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/decoherence.md")]
    mod decoherence {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
}
