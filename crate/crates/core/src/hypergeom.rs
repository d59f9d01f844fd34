//! Gauss hypergeometric function `2F1(a, b; c; z)` for complex parameters and
//! real `0 <= z < 1`.
//!
//! For `z <= 1/2` the defining power series is summed directly. Above that the
//! argument is mapped to `1 - z` with the standard connection formula
//!
//! ```text
//! F(a,b;c;z) = G1 * F(a, b; a+b-c+1; 1-z)
//!            + (1-z)^(c-a-b) * G2 * F(c-a, c-b; c-a-b+1; 1-z)
//! G1 = Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b)),  G2 = Γ(c)Γ(a+b-c) / (Γ(a)Γ(b))
//! ```
//!
//! which degenerates when `c - a - b` is an integer. Near that case the value
//! is obtained by polynomial interpolation in `c` from six nearby
//! non-degenerate evaluations (the function is analytic in `c`), at a reduced
//! accuracy of about `1e-8`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const POLE_TOL: f64 = 1e-12;
const MAX_TERMS: usize = 1_000_000;
const SERIES_REL_STOP: f64 = 1e-17;
const STOP_RUN: usize = 3;
/// Distance of `c - a - b` to an integer below which the interpolation path is used.
const LOG_CASE_WINDOW: f64 = 0.01;
const LOG_CASE_STEP: f64 = 0.005;

/// Arguments of [`gauss_2f1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Params {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub z: f64,
}

impl Hyp2F1Params {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Self {
        Hyp2F1Params { a, b, c, z }
    }

    pub fn real(a: f64, b: f64, c: f64, z: f64) -> Self {
        Hyp2F1Params::new(a.into(), b.into(), c.into(), z)
    }
}

fn near_nonpositive_integer(x: Complex64, tol: f64) -> bool {
    let n = x.re.round();
    n <= 0.0 && (x.re - n).abs() <= tol && x.im.abs() <= tol
}

fn nonpositive_integer_value(x: Complex64) -> Option<i64> {
    near_nonpositive_integer(x, 1e-14).then(|| x.re.round() as i64)
}

/// Power series of `2F1` at `z`; converges for `|z| < 1`.
fn series(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let k = n as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        if term == Complex64::new(0.0, 0.0) {
            return Ok(sum);
        }
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NoConvergence { terms: n + 1 });
        }
        if term.norm() < SERIES_REL_STOP * sum.norm() {
            small_run += 1;
            if small_run >= STOP_RUN {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NoConvergence { terms: MAX_TERMS })
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for complex `z` (Lanczos, reflection for `Re z < 1/2`). The
/// imaginary part is only defined modulo `2π`; callers exponentiate.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &coef) in LANCZOS.iter().enumerate().skip(1) {
        x += coef / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `Γ(num0)Γ(num1) / (Γ(den0)Γ(den1))`, zero when a denominator argument is a
/// pole of Γ.
fn gamma_ratio(num: [Complex64; 2], den: [Complex64; 2]) -> Complex64 {
    if den.iter().any(|&d| nonpositive_integer_value(d).is_some()) {
        return Complex64::new(0.0, 0.0);
    }
    (ln_gamma(num[0]) + ln_gamma(num[1]) - ln_gamma(den[0]) - ln_gamma(den[1])).exp()
}

fn connection(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    let w = 1.0 - z;
    let d = c - a - b;
    let g1 = gamma_ratio([c, d], [c - a, c - b]);
    let g2 = gamma_ratio([c, -d], [a, b]);
    let mut out = Complex64::new(0.0, 0.0);
    if g1 != Complex64::new(0.0, 0.0) {
        out += g1 * series(a, b, 1.0 - d, w)?;
    }
    if g2 != Complex64::new(0.0, 0.0) {
        out += g2 * Complex64::new(w, 0.0).powc(d) * series(c - a, c - b, 1.0 + d, w)?;
    }
    Ok(out)
}

/// Neville interpolation of `(x_i, y_i)` evaluated at `x = 0`.
fn neville_at_zero(xs: &[Complex64], ys: &[Complex64]) -> Complex64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (p[i] * xj - p[i + 1] * xi) / (xj - xi);
        }
    }
    p[0]
}

fn upper_half(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    let d = c - a - b;
    let m = d.re.round();
    if (d - m).norm() >= LOG_CASE_WINDOW {
        return connection(a, b, c, z);
    }
    // Sample at c + s_k with c + s_k - a - b = m + k*step, then interpolate
    // the analytic dependence on s back to s = 0.
    let base = Complex64::new(m, 0.0) - d;
    let mut xs = Vec::with_capacity(6);
    let mut ys = Vec::with_capacity(6);
    for k in [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0] {
        let shift = base + k * LOG_CASE_STEP;
        let c_shifted = c + shift;
        if near_nonpositive_integer(c_shifted, POLE_TOL) {
            continue;
        }
        xs.push(shift);
        ys.push(connection(a, b, c_shifted, z)?);
    }
    Ok(neville_at_zero(&xs, &ys))
}

/// Evaluates `2F1(a, b; c; z)`.
///
/// Accuracy is about `1e-12` relative for `z <= 1/2` and `1e-10` above; the
/// integer `c - a - b` neighbourhood degrades to about `1e-8`.
pub fn gauss_2f1(p: Hyp2F1Params) -> Result<Complex64> {
    let Hyp2F1Params { a, b, c, z } = p;
    // canonical parameter order makes the a <-> b symmetry bit-exact
    let (a, b) = if (b.re, b.im) < (a.re, a.im) { (b, a) } else { (a, b) };
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidParameter(format!("z = {z} outside [0, 1)")));
    }
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidParameter("non-finite hypergeometric parameter".into()));
    }
    if near_nonpositive_integer(c, POLE_TOL) {
        return Err(Error::PoleAtC { re: c.re, im: c.im });
    }
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    // terminating series are exact polynomials at every z
    if nonpositive_integer_value(a).is_some() || nonpositive_integer_value(b).is_some() || z <= 0.5 {
        return series(a, b, c, z);
    }
    upper_half(a, b, c, z)
}

/// Complex-`c` convenience wrapper used by the seed formulas.
pub fn hyp2f1(a: Complex64, b: Complex64, c: Complex64, z: f64) -> Result<Complex64> {
    gauss_2f1(Hyp2F1Params::new(a, b, c, z))
}
