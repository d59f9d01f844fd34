//! Exact seed solutions for the constant potential and the tanh step.

use num_complex::Complex64;

use crate::darboux::ChainStep;
use crate::error::{Error, Result};
use crate::hypergeom::hyp2f1;
use crate::system::Spinor2;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Constant potential `f = c0` with spectral parameter `epsilon` and the two
/// free amplitudes `p0`, `q0` of the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSeedParams {
    pub c0: f64,
    pub epsilon: Complex64,
    pub p0: Complex64,
    pub q0: Complex64,
}

impl ConstantSeedParams {
    pub fn new(c0: f64, epsilon: Complex64, p0: Complex64, q0: Complex64) -> Result<Self> {
        if !(c0.is_finite() && epsilon.is_finite() && p0.is_finite() && q0.is_finite()) {
            return Err(Error::InvalidParameter("constant seed parameters must be finite".into()));
        }
        if p0 == Complex64::new(0.0, 0.0) && q0 == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("p0 and q0 cannot both vanish".into()));
        }
        Ok(ConstantSeedParams { c0, epsilon, p0, q0 })
    }

    /// Principal root of `ω² = c0² + ε²`.
    pub fn omega(&self) -> Complex64 {
        (Complex64::new(self.c0 * self.c0, 0.0) + self.epsilon * self.epsilon).sqrt()
    }
}

/// `ψ₁ = i(c0−ω)p0 e^{iωt} − ε q0 e^{−iωt}`, `ψ₂ = iε p0 e^{iωt} + (c0−ω) q0 e^{−iωt}`.
pub fn constant_seed(params: &ConstantSeedParams, t: f64) -> Spinor2 {
    let ConstantSeedParams { c0, epsilon, p0, q0 } = *params;
    let w = params.omega();
    let plus = (I * w * t).exp();
    let minus = (-I * w * t).exp();
    let cw = Complex64::new(c0, 0.0) - w;
    Spinor2::new(
        I * cw * p0 * plus - epsilon * q0 * minus,
        I * epsilon * p0 * plus + cw * q0 * minus,
    )
}

/// Amplitudes `(p0, q0)` of the seed at `ε = −iR` whose Darboux data is the
/// closed-form first family with phase `gamma`: a time shift by
/// `gamma / ω0`, `ω0 = sqrt|R² − c0²|`, of the `(1, 1)` solution.
pub fn constants_for_phase(c0: f64, radius: f64, gamma: f64) -> Result<(Complex64, Complex64)> {
    let omega0 = (radius * radius - c0 * c0).abs().sqrt();
    if omega0 < 1e-12 * radius.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "|R| = |c0| = {} leaves no frequency to shift",
            c0.abs()
        )));
    }
    let w = Complex64::new(c0 * c0 - radius * radius, 0.0).sqrt();
    let shift = gamma / omega0;
    Ok(((I * w * shift).exp(), (-I * w * shift).exp()))
}

/// Variable `z = (1 + tanh(t/T)) / 2` and `1 − z`, both computed without
/// cancellation.
pub fn tanh_variable(t: f64, t_scale: f64) -> (f64, f64) {
    let x = 2.0 * t / t_scale;
    if x >= 0.0 {
        let e = (-x).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = x.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

/// `z^s` for real positive `z` and complex `s`.
fn real_pow(z: f64, s: Complex64) -> Complex64 {
    (s * z.ln()).exp()
}

/// General solution for the tanh step at arbitrary complex `ε`, a combination
/// of two hypergeometric branches with weights `c1`, `c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhGeneralSeed {
    pub r0: f64,
    pub r1: f64,
    pub t_scale: f64,
    pub epsilon: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl TanhGeneralSeed {
    pub fn new(r0: f64, r1: f64, t_scale: f64, epsilon: Complex64, c1: Complex64, c2: Complex64) -> Result<Self> {
        if !(r0.is_finite() && r1.is_finite() && t_scale.is_finite() && t_scale != 0.0) {
            return Err(Error::InvalidParameter("tanh seed needs finite r0, r1 and T != 0".into()));
        }
        if !(epsilon.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParameter("tanh seed constants must be finite".into()));
        }
        Ok(TanhGeneralSeed { r0, r1, t_scale, epsilon, c1, c2 })
    }

    /// Roots `(μ, ν)` of `4μ² + E² + (r0−r1)² = 0`, `4ν² + E² + (r0+r1)² = 0`,
    /// `E = εT`, principal branch.
    pub fn exponents(&self) -> (Complex64, Complex64) {
        let e = self.epsilon * self.t_scale;
        let dm = self.r0 - self.r1;
        let dp = self.r0 + self.r1;
        let mu = 0.5 * (-(e * e) - dm * dm).sqrt();
        let nu = 0.5 * (-(e * e) - dp * dp).sqrt();
        (mu, nu)
    }
}

/// Evaluates the two-branch hypergeometric solution for the tanh step.
pub fn tanh_seed_general(seed: &TanhGeneralSeed, t: f64) -> Result<Spinor2> {
    let TanhGeneralSeed { r0, r1, t_scale, epsilon, c1, c2 } = *seed;
    let (mu, nu) = seed.exponents();
    let (z, one_minus_z) = tanh_variable(t, t_scale);
    let e = epsilon * t_scale;
    let ir0 = Complex64::new(0.0, r0);
    let a = mu + nu + ir0;
    let b = mu + nu - ir0;
    let a_bar = -mu + nu + ir0;
    let b_bar = -mu + nu - ir0;
    let weight = real_pow(one_minus_z, nu);
    let dm = Complex64::new(r0 - r1, 0.0);

    let zero = Complex64::new(0.0, 0.0);
    let (mut psi1, mut psi2) = (zero, zero);
    if c1 != zero {
        let c = ONE + 2.0 * mu;
        let zp = real_pow(z, mu);
        psi1 += c1 * zp * hyp2f1(a + 1.0, b, c, z)?;
        psi2 += (dm + 2.0 * I * mu) * c1 * zp * hyp2f1(a, b + 1.0, c, z)?;
    }
    if c2 != zero {
        let c_bar = ONE - 2.0 * mu;
        let zm = real_pow(z, -mu);
        psi1 += c2 * zm * hyp2f1(a_bar + 1.0, b_bar, c_bar, z)?;
        psi2 += (dm - 2.0 * I * mu) * c2 * zm * hyp2f1(a_bar, b_bar + 1.0, c_bar, z)?;
    }
    Ok(Spinor2::new(weight * e * psi1, weight * psi2))
}

/// Real-exponent seed of the tanh step at `ε = −iR/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSeedParams {
    pub r0: f64,
    pub r1: f64,
    pub t_scale: f64,
    /// `R`; the spectral value is `ε = −iR/T`.
    pub radius: f64,
    /// Positive ratio constant fixing `c1/c2 = p^{2μ0} e^{−2iφ0}`.
    pub p: f64,
    mu0: f64,
    nu0: f64,
    phi0: f64,
}

impl TanhSeedParams {
    pub fn new(r0: f64, r1: f64, t_scale: f64, radius: f64, p: f64) -> Result<Self> {
        let all_finite = [r0, r1, t_scale, radius, p].iter().all(|x| x.is_finite());
        if !all_finite || t_scale == 0.0 {
            return Err(Error::InvalidParameter("tanh seed needs finite parameters and T != 0".into()));
        }
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must be positive")));
        }
        let bound = (r0 - r1).powi(2).max((r0 + r1).powi(2));
        if !(radius * radius > bound) {
            return Err(Error::InvalidParameter(format!(
                "reality condition R^2 > max(r0 +- r1)^2 fails: {} <= {bound}",
                radius * radius
            )));
        }
        let mu0 = 0.5 * (radius * radius - (r0 - r1).powi(2)).sqrt();
        let nu0 = 0.5 * (radius * radius - (r0 + r1).powi(2)).sqrt();
        let two_mu = 2.0 * mu0;
        if (two_mu - two_mu.round()).abs() < 1e-9 {
            return Err(Error::PoleAtC { re: 1.0 - two_mu, im: 0.0 });
        }
        let phase = Complex64::new(r0 - r1, two_mu) / radius;
        let phi0 = 0.5 * phase.arg();
        Ok(TanhSeedParams { r0, r1, t_scale, radius, p, mu0, nu0, phi0 })
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    /// Constant phase with `e^{2iφ0} = (r0 − r1 + 2iμ0)/R`.
    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Spectral value `ε = −iR/T` of this seed.
    pub fn epsilon(&self) -> Complex64 {
        Complex64::new(0.0, -self.radius / self.t_scale)
    }

    /// Branch weights `c1 = p^{μ0} e^{−iφ0}`, `c2 = p^{−μ0} e^{iφ0}` (so `c1 c2 = 1`).
    pub fn branch_weights(&self) -> (Complex64, Complex64) {
        let s = self.p.powf(self.mu0);
        (
            Complex64::from_polar(s, -self.phi0),
            Complex64::from_polar(1.0 / s, self.phi0),
        )
    }

    /// `A = (pz)^{μ0} e^{−iφ0} F0 + (pz)^{−μ0} e^{iφ0} F1`.
    pub fn amplitude(&self, t: f64) -> Result<Complex64> {
        let (z, _) = tanh_variable(t, self.t_scale);
        let (f0, f1) = self.branch_functions(z)?;
        let (c1, c2) = self.branch_weights();
        Ok(c1 * z.powf(self.mu0) * f0 + c2 * z.powf(-self.mu0) * f1)
    }

    fn branch_functions(&self, z: f64) -> Result<(Complex64, Complex64)> {
        let a0 = Complex64::new(self.mu0 + self.nu0, self.r0);
        let a0_bar = Complex64::new(-self.mu0 + self.nu0, self.r0);
        let f0 = hyp2f1(a0 + 1.0, a0.conj(), Complex64::new(1.0 + 2.0 * self.mu0, 0.0), z)?;
        let f1 = hyp2f1(a0_bar + 1.0, a0_bar.conj(), Complex64::new(1.0 - 2.0 * self.mu0, 0.0), z)?;
        Ok((f0, f1))
    }

    /// The same solution written as the general two-branch seed.
    pub fn as_general(&self) -> TanhGeneralSeed {
        let (c1, c2) = self.branch_weights();
        TanhGeneralSeed {
            r0: self.r0,
            r1: self.r1,
            t_scale: self.t_scale,
            epsilon: self.epsilon(),
            c1,
            c2,
        }
    }
}

const REALITY_TOL: f64 = 1e-8;

/// `ψ₁ = −iR(1−z)^{ν0} A`, `ψ₂ = R(1−z)^{ν0} A*`.
///
/// The second component is cross-checked against the general two-branch
/// formula, which evaluates different hypergeometric functions.
pub fn tanh_seed_real(params: &TanhSeedParams, t: f64) -> Result<Spinor2> {
    let a = params.amplitude(t)?;
    let (_, one_minus_z) = tanh_variable(t, params.t_scale);
    let w = one_minus_z.powf(params.nu0) * params.radius;
    let psi = Spinor2::new(Complex64::new(0.0, -w) * a, w * a.conj());

    let general = tanh_seed_general(&params.as_general(), t)?;
    let scale = psi.norm().max(f64::MIN_POSITIVE);
    let gap = (general - psi).norm() / scale;
    if !(gap <= REALITY_TOL) {
        return Err(Error::RealityViolated { imag: gap });
    }
    Ok(psi)
}

/// Which exact solutions feed a Darboux chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedFamily {
    /// Constant potential `c0`. A chain step `(R, γ)` uses the amplitudes of
    /// [`constants_for_phase`]; other spectral values use `p0 = q0 = 1`.
    Constant { c0: f64 },
    /// Tanh step. A chain step `(R, p)` means the real seed with spectral value
    /// `−iR` (that is, `TanhSeedParams` radius `R·T`); other values use the
    /// general seed with `c1 = c2 = 1`.
    TanhStep { r0: f64, r1: f64, t_scale: f64 },
}

impl SeedFamily {
    /// Seed solution at spectral value `epsilon`. When `epsilon` equals
    /// `−i·radius` of one of `steps`, the reality-structured solution of that
    /// step is returned.
    pub fn solution(&self, epsilon: Complex64, t: f64, steps: &[ChainStep]) -> Result<Spinor2> {
        let matched = steps.iter().find(|s| {
            let target = Complex64::new(0.0, -s.radius);
            (epsilon - target).norm() <= 1e-12 * s.radius.abs().max(1.0)
        });
        match (*self, matched) {
            (SeedFamily::Constant { c0 }, Some(step)) => {
                let (p0, q0) = constants_for_phase(c0, step.radius, step.constant)?;
                Ok(constant_seed(&ConstantSeedParams::new(c0, epsilon, p0, q0)?, t))
            }
            (SeedFamily::Constant { c0 }, None) => {
                Ok(constant_seed(&ConstantSeedParams::new(c0, epsilon, ONE, ONE)?, t))
            }
            (SeedFamily::TanhStep { r0, r1, t_scale }, Some(step)) => {
                let params = TanhSeedParams::new(r0, r1, t_scale, step.radius * t_scale, step.constant)?;
                tanh_seed_real(&params, t)
            }
            (SeedFamily::TanhStep { r0, r1, t_scale }, None) => {
                tanh_seed_general(&TanhGeneralSeed::new(r0, r1, t_scale, epsilon, ONE, ONE)?, t)
            }
        }
    }

    /// Potential the seeds solve.
    pub fn potential(&self) -> crate::system::PotentialSpec {
        use crate::system::PotentialSpec;
        match *self {
            SeedFamily::Constant { c0 } => PotentialSpec::Constant { c0 },
            SeedFamily::TanhStep { r0, r1, t_scale } => PotentialSpec::TanhStep { r0, r1, t_scale },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{TimeGrid, Trajectory};
    use crate::system::{residual, PotentialSpec, TwoLevelSystem};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_seed_direct_substitution() {
        let params = ConstantSeedParams::new(0.0, c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let s = constant_seed(&params, 0.0);
        assert!((s.psi1 - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((s.psi2 - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(ConstantSeedParams::new(0.0, c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn constant_seed_hyperbolic_branch() {
        let params = ConstantSeedParams::new(1.0, c(0.0, -2.0), c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        let w = params.omega();
        assert!((w - c(0.0, 3.0_f64.sqrt())).norm() < 1e-15);
        let grid = TimeGrid::uniform(-3.0, 3.0, 601).unwrap();
        let traj = Trajectory::sample(&grid, |t| Ok(constant_seed(&params, t))).unwrap();
        let sys = TwoLevelSystem::new(params.epsilon, PotentialSpec::constant(1.0).unwrap()).unwrap();
        assert!(residual(&traj, &sys).unwrap() < 1e-9);
    }

    #[test]
    fn constant_seed_is_linear_in_amplitudes() {
        let base = ConstantSeedParams::new(0.4, c(0.9, 0.2), c(1.0, -0.5), c(0.3, 0.7)).unwrap();
        let lambda = c(-1.5, 2.0);
        let scaled = ConstantSeedParams::new(0.4, c(0.9, 0.2), base.p0 * lambda, base.q0 * lambda).unwrap();
        for t in [-1.0, 0.0, 2.5] {
            let a = constant_seed(&scaled, t);
            let b = constant_seed(&base, t) * lambda;
            assert!((a - b).norm() <= 1e-14 * b.norm());
        }
    }

    #[test]
    fn phase_constants_shift_time() {
        let (c0, r, gamma) = (0.3, 1.0, 0.4);
        let (p0, q0) = constants_for_phase(c0, r, gamma).unwrap();
        let omega0 = (r * r - c0 * c0).sqrt();
        let eps = c(0.0, -r);
        let shifted = ConstantSeedParams::new(c0, eps, p0, q0).unwrap();
        let unit = ConstantSeedParams::new(c0, eps, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let a = constant_seed(&shifted, 0.2);
        let b = constant_seed(&unit, 0.2 + gamma / omega0);
        assert!((a - b).norm() < 1e-13 * b.norm());
        assert!(constants_for_phase(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn tanh_variable_is_accurate_in_both_tails() {
        let (z, w) = tanh_variable(-30.0, 1.0);
        assert!(z > 0.0 && (w - 1.0).abs() < 1e-15);
        let (z, w) = tanh_variable(30.0, 1.0);
        assert!(w > 0.0 && (w - (-60.0_f64).exp()).abs() < 1e-40 && (z - 1.0).abs() < 1e-15);
        let (z, w) = tanh_variable(0.0, 2.0);
        assert_eq!((z, w), (0.5, 0.5));
    }

    #[test]
    fn tanh_real_seed_at_origin() {
        let params = TanhSeedParams::new(1.0, 0.0, 1.0, 2.0, 1.0).unwrap();
        let half_sqrt3 = 0.5 * 3.0_f64.sqrt();
        assert!((params.mu0() - half_sqrt3).abs() < 1e-15);
        assert!((params.nu0() - half_sqrt3).abs() < 1e-15);
        let s = tanh_seed_real(&params, 0.0).unwrap();
        assert!(s.is_finite());
        assert!((s.psi1.norm() - s.psi2.norm()).abs() < 1e-14 * s.psi1.norm());
    }

    #[test]
    fn tanh_real_seed_conjugate_structure() {
        let params = TanhSeedParams::new(0.8, 0.3, 1.4, 2.5, 1.7).unwrap();
        for t in [-3.0, -0.4, 0.0, 1.1, 3.0] {
            let s = tanh_seed_real(&params, t).unwrap();
            let (_, w) = tanh_variable(t, params.t_scale);
            let scale = w.powf(-params.nu0());
            let lhs = s.psi2 * scale / params.radius;
            let rhs = (s.psi1 * scale / c(0.0, -params.radius)).conj();
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn tanh_real_seed_rejects_invalid_parameters() {
        assert!(TanhSeedParams::new(1.0, 0.0, 1.0, 0.9, 1.0).is_err());
        assert!(TanhSeedParams::new(1.0, 0.0, 1.0, 2.0, 0.0).is_err());
        assert!(TanhSeedParams::new(1.0, 0.0, 0.0, 2.0, 1.0).is_err());
        // 2 mu0 = 2 exactly
        let err = TanhSeedParams::new(0.0, 0.0, 1.0, 2.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::PoleAtC { .. }));
    }

    #[test]
    fn tanh_general_seed_far_left_follows_power_law() {
        // z -> 0: the c1 branch behaves as E z^mu (1 - z)^nu
        let seed = TanhGeneralSeed::new(0.7, 0.2, 1.0, c(1.3, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let (mu, _) = seed.exponents();
        let t = -12.0;
        let (z, _) = tanh_variable(t, 1.0);
        let s = tanh_seed_general(&seed, t).unwrap();
        let leading = seed.epsilon * real_pow(z, mu);
        assert!((s.psi1 - leading).norm() < 1e-9 * leading.norm());
    }
}
