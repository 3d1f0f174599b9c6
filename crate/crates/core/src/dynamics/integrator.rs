// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) stepper with compensated state accumulation.
//!
//! The stepper advances a small fixed-size system `y' = f(s, y)` one accepted
//! step at a time. Increments are added with Kahan–Babuška compensation so
//! that a state component that starts at zero (the angle offset) keeps its
//! full relative precision over many steps.

use crate::error::{Error, IntegratorState, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (equal to the last row of `A`, so the last stage is
/// the derivative at the new point).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Embedded fourth-order weights.
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub relative_tolerance: f64,
    /// Floor of the per-component error scale.
    pub absolute_tolerance: f64,
    pub max_step: f64,
    pub initial_step: f64,
    /// Steps shorter than this fraction of `|s|` (or absolute `1e-300`) are
    /// treated as an underflow.
    pub min_step_fraction: f64,
}

/// One accepted step, with the endpoint data needed for Hermite dense output.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub s0: f64,
    pub s1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
}

pub struct Dopri5<F, const N: usize> {
    rhs: F,
    opts: StepperOptions,
    s: f64,
    s_comp: f64,
    y: [f64; N],
    y_comp: [f64; N],
    f: [f64; N],
    h: f64,
    accepted: usize,
    rejected: usize,
}

#[inline]
fn compensated_add(sum: &mut f64, comp: &mut f64, term: f64) {
    // Neumaier's variant of Kahan summation
    let t = *sum + term;
    if sum.abs() >= term.abs() {
        *comp += (*sum - t) + term;
    } else {
        *comp += (term - t) + *sum;
    }
    *sum = t;
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(mut rhs: F, s0: f64, y0: [f64; N], opts: StepperOptions) -> Self {
        let f = rhs(s0, &y0);
        Dopri5 {
            rhs,
            opts,
            s: s0,
            s_comp: 0.0,
            y: y0,
            y_comp: [0.0; N],
            f,
            h: opts.initial_step.min(opts.max_step),
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn time(&self) -> f64 {
        self.s + self.s_comp
    }

    pub fn state(&self) -> [f64; N] {
        let mut out = self.y;
        for (o, c) in out.iter_mut().zip(self.y_comp) {
            *o += c;
        }
        out
    }

    pub fn derivative(&self) -> [f64; N] {
        self.f
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    fn underflow_state(&self) -> IntegratorState {
        let y = self.state();
        IntegratorState {
            s: self.time(),
            offset: y[0],
            theta_dot: if N > 1 { y[1] } else { 0.0 },
        }
    }

    /// Takes one accepted step, never going past `s_limit`.
    pub fn step(&mut self, s_limit: f64) -> Result<Step<N>> {
        let s0 = self.time();
        let y0 = self.state();
        let f0 = self.f;
        let remaining = s_limit - s0;
        if !(remaining > 0.0) {
            return Err(Error::domain("step requested past the integration limit"));
        }
        let min_step = (self.opts.min_step_fraction * s0.abs()).max(1e-300);

        loop {
            let mut h = self.h.min(self.opts.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < min_step && !last {
                return Err(Error::StepUnderflow {
                    state: self.underflow_state(),
                    reason: format!("step size {h:e} fell below {min_step:e}"),
                });
            }

            let mut k = [[0.0; N]; 7];
            k[0] = f0;
            for stage in 1..7 {
                let mut ys = y0;
                for (i, yi) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..stage {
                        acc += A[stage][j] * k[j][i];
                    }
                    *yi += h * acc;
                }
                k[stage] = (self.rhs)(s0 + C[stage] * h, &ys);
            }

            let mut increment = [0.0; N];
            let mut err = 0.0f64;
            let mut finite = true;
            for i in 0..N {
                let mut high = 0.0;
                let mut diff = 0.0;
                for j in 0..7 {
                    high += B[j] * k[j][i];
                    diff += (B[j] - B_LOW[j]) * k[j][i];
                }
                increment[i] = h * high;
                let y_new = y0[i] + increment[i];
                let scale = self.opts.absolute_tolerance
                    + self.opts.relative_tolerance * y0[i].abs().max(y_new.abs());
                let e = (h * diff).abs();
                finite &= increment[i].is_finite() && k[6][i].is_finite();
                let ratio = if e == 0.0 { 0.0 } else { e / scale };
                err = err.max(ratio);
            }

            if !finite || !err.is_finite() {
                self.rejected += 1;
                self.h = h * MIN_FACTOR;
                if self.h < min_step {
                    return Err(Error::StepUnderflow {
                        state: self.underflow_state(),
                        reason: "right-hand side became non-finite".into(),
                    });
                }
                continue;
            }

            if err <= 1.0 {
                for ((y, c), dy) in self.y.iter_mut().zip(&mut self.y_comp).zip(increment) {
                    compensated_add(y, c, dy);
                }
                let s1 = if last {
                    self.s = s_limit;
                    self.s_comp = 0.0;
                    s_limit
                } else {
                    compensated_add(&mut self.s, &mut self.s_comp, h);
                    self.time()
                };
                self.f = k[6];
                self.accepted += 1;
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // keep the unclipped step length for the next attempt
                self.h = if last { self.h.max(h) } else { h * factor };
                return Ok(Step {
                    s0,
                    s1,
                    y0,
                    y1: self.state(),
                    f0,
                    f1: self.f,
                });
            }

            self.rejected += 1;
            self.h = h * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }
}
