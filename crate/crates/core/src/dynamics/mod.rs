// SPDX-License-Identifier: Apache-2.0

//! Classical-gravity evolution of the angular superposition.
//!
//! In the classical scenario each branch of the superposition feels the
//! Newtonian pull of the other, so the angle between them shrinks; in the
//! quantum scenario it stays at θ0. Everything here works in rescaled time
//! `s = t/τ`, where the equation of motion has no free parameters.

mod equation;
mod integrator;
mod trajectory;

pub use equation::{
    angular_acceleration, angular_acceleration_guarded, characteristic_time, conserved_energy,
    small_angle_crossing_time, small_angle_deviation, GuardBand, SmallAngleDeviation,
    SMALL_ANGLE_VALIDITY,
};
pub use integrator::{Dopri5, Step, StepperOptions};
pub use trajectory::{
    integrate, time_to_threshold, DynamicsConfig, Sampling, Termination, ThresholdCrossing,
    Trajectory, TrajectorySample, THRESHOLD_HORIZON,
};
