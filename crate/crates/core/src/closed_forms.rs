//! Explicit families of new potentials.
//!
//! * [`Case1Params`]: one transformation of the constant potential `c0`.
//! * [`Case2Params`]: a second transformation on top of the first family.
//! * [`Case3Params`]: one transformation of the tanh step.
//!
//! Where a literal formula from the classical literature disagrees with the
//! transformation it is meant to describe, the `*_printed` methods keep the
//! literal version and [`FormulaDiscrepancy`] quantifies the gap. The
//! unsuffixed methods always agree with [`crate::darboux::darboux_chain`].

use num_complex::Complex64;

use crate::darboux::{transform_spinor, ChainSpec, ChainStep, DarbouxPair};
use crate::error::{Error, Result};
use crate::numerics::TimeGrid;
use crate::seeds::{SeedFamily, TanhSeedParams};
use crate::system::{PotentialSpec, Spinor2};

const POLE_TOL: f64 = 1e-13;
const DEGENERATE_TOL: f64 = 1e-12;

/// `(cosh φ, dcosh φ/dt)` if `R² > c0²`, else `(cos φ, dcos φ/dt)`, with
/// `φ = 2(ωt + γ)`, `ω = sqrt|R² − c0²|`.
fn phase_function(radius: f64, c0: f64, gamma: f64, t: f64) -> (f64, f64) {
    let d = radius * radius - c0 * c0;
    let w = d.abs().sqrt();
    let phi = 2.0 * (w * t + gamma);
    if d > 0.0 {
        (phi.cosh(), 2.0 * w * phi.sinh())
    } else {
        (phi.cos(), -2.0 * w * phi.sin())
    }
}

fn check_radius(name: &str, radius: f64, c0: f64) -> Result<()> {
    if !(radius.is_finite() && radius != 0.0) {
        return Err(Error::InvalidParameter(format!("{name} = {radius} must be finite and nonzero")));
    }
    if (radius * radius - c0 * c0).abs() <= DEGENERATE_TOL * radius * radius {
        return Err(Error::InvalidParameter(format!("{name}^2 = c0^2 leaves zero frequency")));
    }
    Ok(())
}

/// First family: the constant potential `c0` transformed with the seed at
/// `ε = −iR0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case1Params {
    r0: f64,
    c0: f64,
    gamma0: f64,
}

impl Case1Params {
    pub fn new(r0: f64, c0: f64, gamma0: f64) -> Result<Self> {
        if !(c0.is_finite() && gamma0.is_finite()) {
            return Err(Error::InvalidParameter("c0 and gamma0 must be finite".into()));
        }
        check_radius("R0", r0, c0)?;
        Ok(Case1Params { r0, c0, gamma0 })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// `ω0 = sqrt|R0² − c0²|`.
    pub fn omega0(&self) -> f64 {
        (self.r0 * self.r0 - self.c0 * self.c0).abs().sqrt()
    }

    /// True on the `cosh` branch `R0² > c0²`.
    pub fn is_hyperbolic(&self) -> bool {
        self.r0 * self.r0 > self.c0 * self.c0
    }

    /// `(Q0, dQ0/dt)`, the derivative taken analytically.
    pub fn q(&self, t: f64) -> (f64, f64) {
        let (q, dq) = phase_function(self.r0, self.c0, self.gamma0, t);
        (self.r0 * q, self.r0 * dq)
    }

    /// `α0 = −Q̇0 / (2(Q0 + c0))`, `β0 = c0 + (R0² − c0²)/(Q0 + c0)`.
    pub fn alpha_beta(&self, t: f64) -> Result<(f64, f64)> {
        let (q, dq) = self.q(t);
        let den = q + self.c0;
        if !(den.abs() >= POLE_TOL) {
            return Err(Error::PoleHit { t });
        }
        let d = self.r0 * self.r0 - self.c0 * self.c0;
        Ok((-dq / (2.0 * den), self.c0 + d / den))
    }

    /// `f₁ = c0 + 2(R0² − c0²)/(Q0 + c0) = 2β0 − c0`.
    pub fn potential(&self, t: f64) -> Result<f64> {
        let (_, beta) = self.alpha_beta(t)?;
        Ok(2.0 * beta - self.c0)
    }

    pub fn base_potential(&self) -> PotentialSpec {
        PotentialSpec::Constant { c0: self.c0 }
    }

    pub fn pair(&self) -> DarbouxPair {
        let params = *self;
        DarbouxPair::new(self.r0, move |t| params.alpha_beta(t))
    }

    /// Seed at `epsilon` (amplitudes `p0 = q0 = 1`) mapped with the closed-form
    /// pair; a solution for [`Self::potential`].
    pub fn transformed_spinor(&self, epsilon: Complex64, t: f64) -> Result<Spinor2> {
        let psi = SeedFamily::Constant { c0: self.c0 }.solution(epsilon, t, &[])?;
        let (a, b) = self.alpha_beta(t)?;
        Ok(transform_spinor(a, b, epsilon, &psi))
    }

    /// The same potential as a one-step chain over constant seeds.
    pub fn chain(&self) -> ChainSpec {
        ChainSpec {
            seed: SeedFamily::Constant { c0: self.c0 },
            steps: vec![ChainStep::new(self.r0, self.gamma0)],
        }
    }

    /// Zeros of `Q0 + c0` on the grid (sign changes refined by bisection).
    pub fn poles(&self, grid: &TimeGrid) -> Vec<f64> {
        find_sign_changes(grid, |t| self.q(t).0 + self.c0)
    }

    /// Recovers the first-family parameters from one sample `(α, β)` of a pair
    /// with radius `|R|` over the constant potential `c0`, taken at `t0`.
    pub fn fit(c0: f64, radius: f64, alpha: f64, beta: f64, t0: f64) -> Result<Self> {
        let r = radius.abs();
        check_radius("R", r, c0)?;
        let d = r * r - c0 * c0;
        if (beta - c0).abs() < POLE_TOL {
            return Err(Error::InvalidParameter("beta = c0 has no first-family preimage".into()));
        }
        let q0 = d / (beta - c0) - c0;
        let w = d.abs().sqrt();
        let (r0, phi) = if d > 0.0 {
            let r0 = r.copysign(q0);
            if q0 / r0 < 1.0 - 1e-9 {
                return Err(Error::InconsistentPair { gap: 1.0 - q0 / r0 });
            }
            (r0, (-alpha * (q0 + c0) / (w * r0)).asinh())
        } else {
            let sin = alpha * (q0 + c0) / (w * r);
            (r, sin.atan2(q0 / r))
        };
        Case1Params::new(r0, c0, 0.5 * phi - w * t0)
    }
}

/// Second family: the first family transformed again with the seed at
/// `ε = −iR1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case2Params {
    base: Case1Params,
    r1: f64,
    gamma1: f64,
}

/// Numerator and denominator pieces shared by the corrected and printed
/// second-family formulas, for a given normalization of `Q1`.
fn case2_from_q(base: &Case1Params, r1: f64, q1: f64, dq1: f64, t: f64) -> Result<(f64, f64)> {
    let (a0, b0) = base.alpha_beta(t)?;
    let (r0, c0) = (base.r0, base.c0);
    let (rr0, rr1) = (r0 * r0, r1 * r1);
    let s_inv = r1 * (rr0 + rr1 - 2.0 * b0 * c0) * q1 + a0 * r1 * dq1 + (rr0 + rr1) * c0 - 2.0 * b0 * rr1;
    if !(s_inv.abs() >= POLE_TOL) {
        return Err(Error::PoleHit { t });
    }
    let s = 1.0 / s_inv;
    let alpha = r1 * s * (2.0 * a0 * (c0 * b0 - rr1) * q1 + (2.0 * b0 * b0 - rr0 - rr1) * dq1 / 2.0 + 2.0 * r1 * a0 * (b0 - c0));
    let beta = -r1
        * s
        * ((c0 * (2.0 * b0 * b0 - rr0 + rr1) - 2.0 * b0 * rr1) * q1 - a0 * b0 * dq1
            + r1 * (rr1 - rr0 + 2.0 * b0 * (b0 - c0)));
    Ok((alpha, beta))
}

impl Case2Params {
    pub fn new(base: Case1Params, r1: f64, gamma1: f64) -> Result<Self> {
        if !gamma1.is_finite() {
            return Err(Error::InvalidParameter("gamma1 must be finite".into()));
        }
        check_radius("R1", r1, base.c0)?;
        if (r1 * r1 - base.r0 * base.r0).abs() <= DEGENERATE_TOL * r1 * r1 {
            return Err(Error::InvalidParameter("R1^2 = R0^2 makes the second step degenerate".into()));
        }
        Ok(Case2Params { base, r1, gamma1 })
    }

    pub fn base(&self) -> &Case1Params {
        &self.base
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    /// `ω1 = sqrt|R1² − c0²|`.
    pub fn omega1(&self) -> f64 {
        (self.r1 * self.r1 - self.base.c0 * self.base.c0).abs().sqrt()
    }

    /// `(Q1, dQ1/dt)` with `Q1 = cosh φ1` (or `cos φ1`), without a factor `R1`.
    pub fn q1(&self, t: f64) -> (f64, f64) {
        phase_function(self.r1, self.base.c0, self.gamma1, t)
    }

    /// `(α1, β1)` of the second step.
    pub fn alpha_beta(&self, t: f64) -> Result<(f64, f64)> {
        let (q, dq) = self.q1(t);
        case2_from_q(&self.base, self.r1, q, dq, t)
    }

    /// The same expression with `Q1 = R1 cosh φ1` (or `R1 cos φ1`). This
    /// violates `α1² + β1² = R1²` unless `R1 = 1`.
    pub fn alpha_beta_printed(&self, t: f64) -> Result<(f64, f64)> {
        let (q, dq) = self.q1(t);
        case2_from_q(&self.base, self.r1, self.r1 * q, self.r1 * dq, t)
    }

    /// `f₂ = 2β1 − f₁ = 2(β1 − β0) + c0`.
    pub fn potential(&self, t: f64) -> Result<f64> {
        let (_, b1) = self.alpha_beta(t)?;
        Ok(2.0 * b1 - self.base.potential(t)?)
    }

    /// `2β1 + f₁ = 2(β1 + β0) − c0`, evaluated with [`Self::alpha_beta_printed`].
    pub fn potential_printed(&self, t: f64) -> Result<f64> {
        let (_, b1) = self.alpha_beta_printed(t)?;
        Ok(2.0 * b1 + self.base.potential(t)?)
    }

    pub fn base_potential(&self) -> PotentialSpec {
        PotentialSpec::Case1(self.base)
    }

    pub fn pair(&self) -> DarbouxPair {
        let params = *self;
        DarbouxPair::new(self.r1, move |t| params.alpha_beta(t))
    }

    /// Seed at `epsilon` mapped twice with the closed-form pairs.
    pub fn transformed_spinor(&self, epsilon: Complex64, t: f64) -> Result<Spinor2> {
        let once = self.base.transformed_spinor(epsilon, t)?;
        let (a, b) = self.alpha_beta(t)?;
        Ok(transform_spinor(a, b, epsilon, &once))
    }

    pub fn chain(&self) -> ChainSpec {
        ChainSpec {
            seed: SeedFamily::Constant { c0: self.base.c0 },
            steps: vec![
                ChainStep::new(self.base.r0, self.base.gamma0),
                ChainStep::new(self.r1, self.gamma1),
            ],
        }
    }

    /// Compares the printed expressions against the iterated chain.
    pub fn printed_discrepancies(&self, times: &[f64], tolerance: f64) -> Result<Vec<FormulaDiscrepancy>> {
        let chain = self.chain();
        let point = |t: f64| chain.at(t, None);
        Ok(vec![
            compare_formula("second family", "alpha1", times, tolerance, |t| Ok(point(t)?.pairs[1].0), |t| {
                Ok(self.alpha_beta_printed(t)?.0)
            })?,
            compare_formula("second family", "beta1", times, tolerance, |t| Ok(point(t)?.pairs[1].1), |t| {
                Ok(self.alpha_beta_printed(t)?.1)
            })?,
            compare_formula("second family", "potential", times, tolerance, |t| Ok(point(t)?.potentials[2]), |t| {
                self.potential_printed(t)
            })?,
        ])
    }

    /// Zeros of the denominator `S⁻¹` on the grid.
    pub fn poles(&self, grid: &TimeGrid) -> Vec<f64> {
        let base = self.base;
        let r1 = self.r1;
        find_sign_changes(grid, |t| {
            let (q, dq) = self.q1(t);
            match base.alpha_beta(t) {
                Ok((a0, b0)) => {
                    let (rr0, rr1) = (base.r0 * base.r0, r1 * r1);
                    r1 * (rr0 + rr1 - 2.0 * b0 * base.c0) * q + a0 * r1 * dq + (rr0 + rr1) * base.c0
                        - 2.0 * b0 * rr1
                }
                Err(_) => f64::NAN,
            }
        })
    }
}

/// Third family: the tanh step `(r0/T) tanh(t/T) + r1/T` transformed with
/// its real seed at `ε = −iR/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case3Params {
    seed: TanhSeedParams,
}

impl Case3Params {
    pub fn new(r0: f64, r1: f64, t_scale: f64, radius: f64, p: f64) -> Result<Self> {
        Ok(Case3Params { seed: TanhSeedParams::new(r0, r1, t_scale, radius, p)? })
    }

    pub fn seed(&self) -> &TanhSeedParams {
        &self.seed
    }

    /// Radius `R/T` of the pair, so that `α² + β² = (R/T)²`.
    pub fn pair_radius(&self) -> f64 {
        self.seed.radius / self.seed.t_scale
    }

    pub fn base_potential(&self) -> PotentialSpec {
        PotentialSpec::TanhStep { r0: self.seed.r0, r1: self.seed.r1, t_scale: self.seed.t_scale }
    }

    fn base_value(&self, t: f64) -> f64 {
        (self.seed.r0 * (t / self.seed.t_scale).tanh() + self.seed.r1) / self.seed.t_scale
    }

    /// `(A², |A|²)`, failing with `ZeroA` where the amplitude vanishes.
    fn amplitude_square(&self, t: f64) -> Result<(Complex64, f64)> {
        let a = self.seed.amplitude(t)?;
        if !(a.norm() >= POLE_TOL) {
            return Err(Error::ZeroA { t });
        }
        Ok((a * a, a.norm_sqr()))
    }

    /// `α = (R/T) Im(A²)/|A|²`, `β = −(R/T) Re(A²)/|A|²`.
    pub fn alpha_beta(&self, t: f64) -> Result<(f64, f64)> {
        let (a2, m) = self.amplitude_square(t)?;
        let k = self.pair_radius();
        Ok((k * a2.im / m, -k * a2.re / m))
    }

    /// Literal variant with `β = f + (R/T) Re(A²)/|A|²`.
    pub fn alpha_beta_printed(&self, t: f64) -> Result<(f64, f64)> {
        let (a2, m) = self.amplitude_square(t)?;
        let k = self.pair_radius();
        Ok((k * a2.im / m, self.base_value(t) + k * a2.re / m))
    }

    /// `f₁ = 2β − f = −2(R/T) Re(A²)/|A|² − f`.
    pub fn potential(&self, t: f64) -> Result<f64> {
        let (_, beta) = self.alpha_beta(t)?;
        Ok(2.0 * beta - self.base_value(t))
    }

    /// Literal variant `2(R/T) Re(A²)/|A|² − f`.
    pub fn potential_printed(&self, t: f64) -> Result<f64> {
        let (a2, m) = self.amplitude_square(t)?;
        Ok(2.0 * self.pair_radius() * a2.re / m - self.base_value(t))
    }

    pub fn pair(&self) -> DarbouxPair {
        let params = *self;
        DarbouxPair::new(self.pair_radius(), move |t| params.alpha_beta(t))
    }

    /// General tanh seed at `epsilon` (`c1 = c2 = 1`) mapped with the
    /// closed-form pair.
    pub fn transformed_spinor(&self, epsilon: Complex64, t: f64) -> Result<Spinor2> {
        let family = SeedFamily::TanhStep { r0: self.seed.r0, r1: self.seed.r1, t_scale: self.seed.t_scale };
        let psi = family.solution(epsilon, t, &[])?;
        let (a, b) = self.alpha_beta(t)?;
        Ok(transform_spinor(a, b, epsilon, &psi))
    }

    pub fn chain(&self) -> ChainSpec {
        ChainSpec {
            seed: SeedFamily::TanhStep { r0: self.seed.r0, r1: self.seed.r1, t_scale: self.seed.t_scale },
            steps: vec![ChainStep::new(self.pair_radius(), self.seed.p)],
        }
    }

    /// Compares the printed expressions against the p-vector path.
    pub fn printed_discrepancies(&self, times: &[f64], tolerance: f64) -> Result<Vec<FormulaDiscrepancy>> {
        let chain = self.chain();
        let point = |t: f64| chain.at(t, None);
        Ok(vec![
            compare_formula("third family", "alpha", times, tolerance, |t| Ok(point(t)?.pairs[0].0), |t| {
                Ok(self.alpha_beta_printed(t)?.0)
            })?,
            compare_formula("third family", "beta", times, tolerance, |t| Ok(point(t)?.pairs[0].1), |t| {
                Ok(self.alpha_beta_printed(t)?.1)
            })?,
            compare_formula("third family", "potential", times, tolerance, |t| Ok(point(t)?.potentials[1]), |t| {
                self.potential_printed(t)
            })?,
        ])
    }

    /// For `r0 = 0` the base potential is the constant `r1/T` and the family
    /// collapses onto the first one; returns the matching parameters, fitted at
    /// `t0`.
    pub fn reduce_to_case1(&self, t0: f64) -> Result<Case1Params> {
        if self.seed.r0 != 0.0 {
            return Err(Error::InvalidParameter("reduction needs r0 = 0".into()));
        }
        let (alpha, beta) = self.alpha_beta(t0)?;
        Case1Params::fit(self.seed.r1 / self.seed.t_scale, self.pair_radius(), alpha, beta, t0)
    }
}

/// Maximum gap between a reference function and a candidate formula on a set
/// of sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaDiscrepancy {
    pub formula: String,
    pub term: String,
    pub samples: usize,
    pub max_abs_gap: f64,
    pub worst_t: f64,
    pub tolerance: f64,
}

impl FormulaDiscrepancy {
    pub fn is_consistent(&self) -> bool {
        self.max_abs_gap <= self.tolerance
    }
}

/// Builds a [`FormulaDiscrepancy`]; a candidate that fails to evaluate counts
/// as an infinite gap at that time.
pub fn compare_formula(
    formula: &str,
    term: &str,
    times: &[f64],
    tolerance: f64,
    reference: impl Fn(f64) -> Result<f64>,
    candidate: impl Fn(f64) -> Result<f64>,
) -> Result<FormulaDiscrepancy> {
    let mut max_abs_gap = 0.0;
    let mut worst_t = times.first().copied().unwrap_or(f64::NAN);
    for &t in times {
        let r = reference(t)?;
        let gap = match candidate(t) {
            Ok(c) if c.is_finite() => (c - r).abs(),
            _ => f64::INFINITY,
        };
        if gap > max_abs_gap || gap.is_nan() {
            max_abs_gap = gap;
            worst_t = t;
        }
    }
    Ok(FormulaDiscrepancy {
        formula: formula.to_string(),
        term: term.to_string(),
        samples: times.len(),
        max_abs_gap,
        worst_t,
        tolerance,
    })
}

/// Roots of `g` located by sign changes between grid samples and refined by
/// bisection to machine precision.
pub fn find_sign_changes(grid: &TimeGrid, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let s = grid.samples();
    let mut roots = Vec::new();
    for w in s.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (mut glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            roots.push(lo);
            continue;
        }
        if !(glo * ghi < 0.0) {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    if let Some(&t_end) = s.last() {
        if g(t_end) == 0.0 {
            roots.push(t_end);
        }
    }
    roots
}
