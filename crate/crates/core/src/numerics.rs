//! Numeric substrate: time grids, an adaptive Dormand–Prince 5(4) integrator
//! for two-component complex systems, and fourth-order finite differences.
//!
//! Everything here is pure. The integrator owns no state beyond a single call,
//! so trajectories for different spectral parameters can be computed from
//! several threads at once.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spinor::Spinor2;

/// Default relative tolerance of [`rk_integrate`] callers in this crate.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Default absolute tolerance of [`rk_integrate`] callers in this crate.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Ordered sample times, strictly increasing, at least two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "samples not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(TimeGrid { samples })
    }

    /// `count` equally spaced samples from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(format!("count {count} < 2")));
        }
        if !(start < end) {
            return Err(Error::InvalidGrid(format!("start {start} >= end {end}")));
        }
        let step = (end - start) / (count - 1) as f64;
        let mut samples: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
        // pin the endpoint exactly
        samples[count - 1] = end;
        TimeGrid::new(samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0]
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.t_end() - self.t_start()
    }
}

/// States of a two-level system sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Spinor2>,
    /// Sum of the local error estimates of all accepted steps (absolute,
    /// max-norm). Zero for trajectories built from closed forms.
    pub error_estimate: f64,
}

impl Trajectory {
    /// Samples a closed-form solution on `grid`.
    pub fn sample<F>(grid: &TimeGrid, mut solution: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Spinor2>,
    {
        let states = grid
            .samples()
            .iter()
            .map(|&t| {
                let s = solution(t)?;
                if s.is_finite() {
                    Ok(s)
                } else {
                    Err(Error::NonFiniteState { t })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            grid: grid.clone(),
            states,
            error_estimate: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest componentwise distance to another trajectory on the same grid.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MIN_STEP_FRACTION: f64 = 1e-14;
const MAX_STEPS: usize = 10_000_000;

fn components(s: &Spinor2) -> [f64; 4] {
    [s.psi1.re, s.psi1.im, s.psi2.re, s.psi2.im]
}

/// Hairer's scaled RMS norm over the four real components.
fn scaled_norm(v: &Spinor2, y0: &Spinor2, y1: &Spinor2, rel_tol: f64, abs_tol: f64) -> f64 {
    let (v, a, b) = (components(v), components(y0), components(y1));
    let sum: f64 = (0..4)
        .map(|i| {
            let sc = abs_tol + rel_tol * a[i].abs().max(b[i].abs());
            (v[i] / sc).powi(2)
        })
        .sum();
    (sum / 4.0).sqrt()
}

/// Dense-output polynomial of one accepted step.
struct StepInterpolant {
    t0: f64,
    h: f64,
    r: [Spinor2; 5],
}

impl StepInterpolant {
    fn eval(&self, t: f64) -> Spinor2 {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.r;
        // r1..r4 alone are the cubic Hermite interpolant; r5 lifts it to 4th order.
        r1 + (r2 + (r3 + (r4 + r5 * theta1) * theta) * theta1) * theta
    }
}

fn initial_step<F>(rhs: &mut F, t0: f64, y0: &Spinor2, f0: &Spinor2, span: f64, rel_tol: f64, abs_tol: f64) -> f64
where
    F: FnMut(f64, &Spinor2) -> Spinor2,
{
    let d0 = scaled_norm(y0, y0, y0, rel_tol, abs_tol);
    let d1 = scaled_norm(f0, y0, y0, rel_tol, abs_tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = *y0 + *f0 * h0;
    let f1 = rhs(t0 + h0, &y1);
    let d2 = scaled_norm(&(f1 - *f0), y0, y0, rel_tol, abs_tol) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = rhs(t, y)` from `grid.t_start()` and returns the state at
/// every grid sample.
///
/// Dormand–Prince 5(4) with PI step-size control; grid samples are filled from
/// the continuous extension of each accepted step, so the step sequence does
/// not depend on where the samples lie.
pub fn rk_integrate<F>(mut rhs: F, y0: Spinor2, grid: &TimeGrid, rel_tol: f64, abs_tol: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &Spinor2) -> Spinor2,
{
    if !(rel_tol > 0.0 && abs_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerances must be positive (rel {rel_tol}, abs {abs_tol})"
        )));
    }
    let t_start = grid.t_start();
    if !y0.is_finite() {
        return Err(Error::NonFiniteState { t: t_start });
    }
    let t_end = grid.t_end();
    let span = grid.span();
    let min_step = MIN_STEP_FRACTION * span;

    let samples = grid.samples();
    let mut states = Vec::with_capacity(samples.len());
    states.push(y0);
    let mut next_sample = 1;

    let mut t = t_start;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    if !k1.is_finite() {
        return Err(Error::NonFiniteState { t });
    }
    let mut h = initial_step(&mut rhs, t, &y, &k1, span, rel_tol, abs_tol);
    let mut err_old = 1e-4_f64;
    let mut rejected_last = false;
    let mut error_estimate = 0.0;

    for _ in 0..MAX_STEPS {
        if next_sample >= samples.len() {
            break;
        }
        let last = t + h >= t_end || (t_end - (t + h)) < min_step;
        if last {
            h = t_end - t;
        }
        if h < min_step {
            return Err(Error::StepUnderflow { t, step: h, min: min_step });
        }

        let k2 = rhs(t + C2 * h, &(y + k1 * (A21 * h)));
        let k3 = rhs(t + C3 * h, &(y + (k1 * A31 + k2 * A32) * h));
        let k4 = rhs(t + C4 * h, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * h));
        let k5 = rhs(t + C5 * h, &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h));
        let k6 = rhs(
            t + h,
            &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h),
        );
        let y_new = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
        let k7 = rhs(t + h, &y_new);
        if !y_new.is_finite() || !k7.is_finite() {
            return Err(Error::NonFiniteState { t: t + h });
        }

        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let err = scaled_norm(&err_vec, &y, &y_new, rel_tol, abs_tol);

        let expo = 0.2 - PI_BETA * 0.75;
        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let ydiff = y_new - y;
            let bspl = k1 * h - ydiff;
            let interp = StepInterpolant {
                t0: t,
                h,
                r: [
                    y,
                    ydiff,
                    bspl,
                    ydiff - k7 * h - bspl,
                    (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h,
                ],
            };
            let t_new = if last { t_end } else { t + h };
            while next_sample < samples.len() && samples[next_sample] <= t_new {
                let ts = samples[next_sample];
                states.push(if ts == t_new { y_new } else { interp.eval(ts) });
                next_sample += 1;
            }
            error_estimate += components(&err_vec).iter().fold(0.0_f64, |m, c| m.max(c.abs()));

            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = fac11 / err_old.powf(PI_BETA) / SAFETY;
            fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            err_old = err.max(1e-4);
            rejected_last = false;
            h = h_new.min(span);
        } else {
            let fac = (fac11 / SAFETY).min(1.0 / FAC_MIN);
            h /= fac;
            rejected_last = true;
        }
    }

    if next_sample < samples.len() {
        return Err(Error::StepUnderflow { t, step: h, min: min_step });
    }
    Ok(Trajectory {
        grid: grid.clone(),
        states,
        error_estimate,
    })
}

/// Values that a difference stencil can be applied to.
pub trait Differentiable: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn is_finite_value(&self) -> bool;
}

impl Differentiable for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Differentiable for Complex64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Differentiable for Spinor2 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

fn weighted_sum<T: Differentiable>(values: &[T], weights: &[f64]) -> T {
    values
        .iter()
        .zip(weights)
        .skip(1)
        .fold(values[0] * weights[0], |acc, (&v, &w)| acc + v * w)
}

/// Fourth-order central difference `[f(t-2h) - 8f(t-h) + 8f(t+h) - f(t+2h)] / 12h`.
pub fn finite_difference<T, F>(mut f: F, t: f64, h: f64) -> Result<T>
where
    T: Differentiable,
    F: FnMut(f64) -> T,
{
    try_finite_difference(|s| Ok(f(s)), t, h)
}

/// Same as [`finite_difference`] for closures that can fail.
pub fn try_finite_difference<T, F>(mut f: F, t: f64, h: f64) -> Result<T>
where
    T: Differentiable,
    F: FnMut(f64) -> Result<T>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    let points = [t - 2.0 * h, t - h, t + h, t + 2.0 * h];
    let mut values = Vec::with_capacity(4);
    for &s in &points {
        let v = f(s)?;
        if !v.is_finite_value() {
            return Err(Error::NonFiniteValue { t: s });
        }
        values.push(v);
    }
    let w = 1.0 / (12.0 * h);
    Ok(weighted_sum(&values, &[w, -8.0 * w, 8.0 * w, -w]))
}

/// Weights of the first-derivative stencil at `x0` over the nodes `xs`
/// (Fornberg's recursion). Exact for polynomials of degree `< xs.len()`.
pub fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of node j for derivative order k (k = 0, 1)
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Half width of the [`grid_derivative`] stencil.
pub const GRID_STENCIL_HALF_WIDTH: usize = 3;

/// Derivative of sampled values at interior grid index `i` from the seven
/// nodes `i-3..=i+3`. Sixth order on uniform and smoothly varying grids;
/// `None` within three samples of either end.
pub fn grid_derivative<T: Differentiable>(grid: &TimeGrid, values: &[T], i: usize) -> Option<T> {
    let n = grid.len();
    let k = GRID_STENCIL_HALF_WIDTH;
    if i < k || i + k >= n || values.len() != n {
        return None;
    }
    let xs = &grid.samples()[i - k..=i + k];
    let w = derivative_weights(xs[k], xs);
    Some(weighted_sum(&values[i - k..=i + k], &w))
}
