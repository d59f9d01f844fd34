//! The Darboux transformation: p-vectors, the `(α, β)` pair, the spinor map
//! and iterated chains.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::seeds::SeedFamily;
use crate::system::{pauli, Mat2, PotentialSpec, Spinor2};

const I: Complex64 = Complex64::new(0.0, 1.0);
const DEGENERACY_TOL: f64 = 1e-13;
const REALITY_TOL: f64 = 1e-8;
const PAIR_TOL: f64 = 1e-8;

/// Isotropic complex vector `p_k = ⟨Ψ̄, σ_k Ψ⟩` built from one spinor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PVector(pub [Complex64; 3]);

impl PVector {
    pub fn p1(&self) -> Complex64 {
        self.0[0]
    }

    pub fn p2(&self) -> Complex64 {
        self.0[1]
    }

    pub fn p3(&self) -> Complex64 {
        self.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Bilinear square `p·p`, zero for every p-vector.
    pub fn square(&self) -> Complex64 {
        self.0.iter().map(|c| c * c).sum()
    }

    /// `|p·p| / |p|²`.
    pub fn isotropy_residual(&self) -> f64 {
        let n2 = self.norm().powi(2);
        if n2 == 0.0 {
            0.0
        } else {
            self.square().norm() / n2
        }
    }

    /// Principal root `q = sqrt(p1² + p2²)`, so that `p3² = −q²`.
    pub fn q(&self) -> Complex64 {
        (self.p1() * self.p1() + self.p2() * self.p2()).sqrt()
    }

    pub fn scale(&self, k: Complex64) -> PVector {
        PVector(self.0.map(|c| c * k))
    }

    /// Removes the global phase so that `p3 = −i|p3|`. `None` when `p3 = 0`.
    pub fn phase_normalized(&self) -> Option<PVector> {
        let p3 = self.p3();
        if p3.norm() == 0.0 {
            return None;
        }
        Some(self.scale(-I * p3.norm() / p3))
    }
}

/// `Ψ̄ = (−ψ₂*, ψ₁*)`.
pub fn conjugate_spinor(psi: &Spinor2) -> Spinor2 {
    Spinor2::new(-psi.psi2.conj(), psi.psi1.conj())
}

/// `⟨a, b⟩ = a₁* b₁ + a₂* b₂`.
pub fn spinor_inner(a: &Spinor2, b: &Spinor2) -> Complex64 {
    a.psi1.conj() * b.psi1 + a.psi2.conj() * b.psi2
}

/// `p = (ψ₁² − ψ₂², i(ψ₁² + ψ₂²), −2ψ₁ψ₂)`.
pub fn p_vector(psi: &Spinor2) -> PVector {
    let (a, b) = (psi.psi1, psi.psi2);
    PVector([a * a - b * b, I * (a * a + b * b), -2.0 * a * b])
}

/// The same vector evaluated from the inner-product definition with the Pauli
/// matrices.
pub fn p_vector_by_definition(psi: &Spinor2) -> PVector {
    let bar = conjugate_spinor(psi);
    let v = psi.to_vector();
    PVector([1, 2, 3].map(|k| spinor_inner(&bar, &Spinor2::from_vector(&(pauli(k) * v)))))
}

/// `α = iR p2/p3`, `β = iR p1/p3`, real for a solution at `ε = −iR` of a real
/// potential. The ratios are insensitive to the global phase of `p`.
pub fn alpha_beta_from_p(p: &PVector, radius: f64) -> Result<(f64, f64)> {
    if !(radius.is_finite() && radius != 0.0) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be finite and nonzero")));
    }
    let norm = p.norm();
    if !(p.p3().norm() > DEGENERACY_TOL * norm) {
        return Err(Error::DegenerateP { t: f64::NAN });
    }
    let ir = Complex64::new(0.0, radius);
    let alpha = ir * p.p2() / p.p3();
    let beta = ir * p.p1() / p.p3();
    let scale = radius.abs().max(alpha.re.abs()).max(beta.re.abs());
    let imag = alpha.im.abs().max(beta.im.abs());
    if !(imag <= REALITY_TOL * scale) {
        return Err(Error::RealityViolated { imag });
    }
    Ok((alpha.re, beta.re))
}

/// `α − i(εσ₁ + βσ₃)`.
pub fn dressing_matrix(alpha: f64, beta: f64, epsilon: Complex64) -> Mat2 {
    let a = Complex64::new(alpha, 0.0);
    let b = Complex64::new(beta, 0.0);
    pauli(0) * a - (pauli(1) * epsilon + pauli(3) * b) * I
}

/// `Φ = [α − i(εσ₁ + βσ₃)]Ψ`.
pub fn transform_spinor(alpha: f64, beta: f64, epsilon: Complex64, psi: &Spinor2) -> Spinor2 {
    let a = Complex64::new(alpha, -beta);
    let b = Complex64::new(alpha, beta);
    Spinor2::new(a * psi.psi1 - I * epsilon * psi.psi2, -I * epsilon * psi.psi1 + b * psi.psi2)
}

/// The map written through the p-vector, `Φ = q⁻¹ σ₂ (σ·p̃) Ψ` with
/// `p̃ = (p1, p2, εq/R)`.
///
/// On the branch `p3 = −iq` (see [`PVector::phase_normalized`]) this equals
/// `−1/R` times [`transform_spinor`].
pub fn transform_spinor_p_form(p: &PVector, epsilon: Complex64, radius: f64, psi: &Spinor2) -> Result<Spinor2> {
    let q = p.q();
    if !(q.norm() > DEGENERACY_TOL * p.norm()) || radius == 0.0 {
        return Err(Error::DegenerateP { t: f64::NAN });
    }
    let p3 = epsilon * q / radius;
    let sigma_p = pauli(1) * p.p1() + pauli(2) * p.p2() + pauli(3) * p3;
    let m = pauli(2) * sigma_p / q;
    Ok(Spinor2::from_vector(&(m * psi.to_vector())))
}

/// `f₁ = 2β − f`.
pub fn transformed_potential(beta: f64, f_value: f64) -> f64 {
    2.0 * beta - f_value
}

/// `−2p1/q − f`, the potential attached to the p-vector form of the map. It
/// agrees with [`transformed_potential`] only when `R = 1`; in general
/// `f₁ + f` differs by the factor `R`.
pub fn potential_from_p_unscaled(p: &PVector, f_value: f64) -> Result<f64> {
    let p = p.phase_normalized().ok_or(Error::DegenerateP { t: f64::NAN })?;
    let q = p.q();
    if !(q.norm() > DEGENERACY_TOL * p.norm()) {
        return Err(Error::DegenerateP { t: f64::NAN });
    }
    let v = -2.0 * p.p1() / q;
    if !(v.im.abs() <= REALITY_TOL * v.norm().max(1.0)) {
        return Err(Error::RealityViolated { imag: v.im.abs() });
    }
    Ok(v.re - f_value)
}

/// Angle `μ` with `α = R cos μ`, `β = R sin μ`.
pub fn mu_from_alpha_beta(alpha: f64, beta: f64, radius: f64) -> Result<f64> {
    let gap = (alpha * alpha + beta * beta - radius * radius).abs();
    if !(gap <= PAIR_TOL * radius * radius) {
        return Err(Error::InconsistentPair { gap });
    }
    Ok((beta / radius).atan2(alpha / radius))
}

/// `B = α + i(f − β)σ₃`, the multiplicative part of the intertwining
/// operator `d/dt + B`.
pub fn intertwining_matrix(alpha: f64, beta: f64, f_value: f64) -> Mat2 {
    pauli(0) * Complex64::new(alpha, 0.0) + pauli(3) * Complex64::new(0.0, f_value - beta)
}

type PairFn = dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync;

/// Real functions `(α(t), β(t))` together with the radius `R` of the
/// spectral value `ε = −iR` that produced them.
#[derive(Clone)]
pub struct DarbouxPair {
    radius: f64,
    eval: Arc<PairFn>,
}

impl fmt::Debug for DarbouxPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DarbouxPair").field("radius", &self.radius).finish_non_exhaustive()
    }
}

impl DarbouxPair {
    pub fn new(radius: f64, eval: impl Fn(f64) -> Result<(f64, f64)> + Send + Sync + 'static) -> Self {
        DarbouxPair { radius, eval: Arc::new(eval) }
    }

    /// Pair obtained pointwise from a seed solution at `ε = −iR`.
    pub fn from_seed(radius: f64, seed: impl Fn(f64) -> Result<Spinor2> + Send + Sync + 'static) -> Self {
        DarbouxPair::new(radius, move |t| {
            alpha_beta_from_p(&p_vector(&seed(t)?), radius).map_err(|e| e.at_time(t))
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha_beta(&self, t: f64) -> Result<(f64, f64)> {
        (self.eval)(t)
    }

    /// Transformed potential `2β − f`.
    pub fn potential(&self, base: &PotentialSpec, t: f64) -> Result<f64> {
        let (_, beta) = self.alpha_beta(t)?;
        Ok(transformed_potential(beta, base.eval(t)?))
    }

    /// Maps a solution of the old problem at spectral value `epsilon`.
    pub fn transform(&self, epsilon: Complex64, psi: &Spinor2, t: f64) -> Result<Spinor2> {
        let (a, b) = self.alpha_beta(t)?;
        Ok(transform_spinor(a, b, epsilon, psi))
    }
}

/// One step of an iterated transformation: spectral value `ε = −i·radius` and
/// the real constant selecting the seed solution at that value (a phase for
/// constant seeds, the ratio `p` for tanh seeds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStep {
    pub radius: f64,
    pub constant: f64,
}

impl ChainStep {
    pub fn new(radius: f64, constant: f64) -> Self {
        ChainStep { radius, constant }
    }
}

/// Values of an iterated transformation at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPoint {
    /// `f_0, f_1, ..., f_n`.
    pub potentials: Vec<f64>,
    /// `(α_k, β_k)` for each step.
    pub pairs: Vec<(f64, f64)>,
    /// Transformed solution at the requested spectral value, if any.
    pub spinor: Option<Spinor2>,
}

/// Runs the iterated transformation at time `t`.
///
/// Step `k` takes the seed at `ε_k = −iR_k`, pushes it through the first `k`
/// transformations (evaluated at the same `ε_k`), reads off `(α_k, β_k)` and
/// sets `f_{k+1} = 2β_k − f_k`. If `epsilon` is given, the seed at that value
/// is pushed through all steps as well.
pub fn darboux_chain(
    seed: &dyn Fn(Complex64, f64) -> Result<Spinor2>,
    base: &PotentialSpec,
    radii: &[f64],
    t: f64,
    epsilon: Option<Complex64>,
) -> Result<ChainPoint> {
    let mut potentials = Vec::with_capacity(radii.len() + 1);
    potentials.push(base.eval(t)?);
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(radii.len());
    let push = |eps: Complex64, pairs: &[(f64, f64)]| -> Result<Spinor2> {
        let mut psi = seed(eps, t)?;
        for &(a, b) in pairs {
            psi = transform_spinor(a, b, eps, &psi);
        }
        Ok(psi)
    };
    for (k, &radius) in radii.iter().enumerate() {
        let wrap = |e: Error| Error::ChainStep { step: k, source: Box::new(e.at_time(t)) };
        let psi = push(Complex64::new(0.0, -radius), &pairs).map_err(wrap)?;
        let (alpha, beta) = alpha_beta_from_p(&p_vector(&psi), radius).map_err(wrap)?;
        let f_next = transformed_potential(beta, potentials[k]);
        pairs.push((alpha, beta));
        potentials.push(f_next);
    }
    let spinor = match epsilon {
        Some(eps) => Some(push(eps, &pairs)?),
        None => None,
    };
    Ok(ChainPoint { potentials, pairs, spinor })
}

/// Data-only description of an iterated transformation starting from a seed
/// family.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub seed: SeedFamily,
    pub steps: Vec<ChainStep>,
}

impl ChainSpec {
    pub fn new(seed: SeedFamily, steps: Vec<ChainStep>) -> Result<Self> {
        let spec = ChainSpec { seed, steps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.seed.potential().validate()?;
        for (k, s) in self.steps.iter().enumerate() {
            if !(s.radius.is_finite() && s.radius != 0.0 && s.constant.is_finite()) {
                return Err(Error::InvalidParameter(format!("chain step {k} has invalid data {s:?}")));
            }
            if self.steps[..k].iter().any(|r| (r.radius.abs() - s.radius.abs()).abs() <= 1e-12 * s.radius.abs()) {
                return Err(Error::InvalidParameter(format!("chain step {k} repeats |R| = {}", s.radius.abs())));
            }
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.radius).collect()
    }

    /// The chain with only its first `k` steps.
    pub fn truncated(&self, k: usize) -> ChainSpec {
        ChainSpec { seed: self.seed, steps: self.steps[..k.min(self.steps.len())].to_vec() }
    }

    /// Runs [`darboux_chain`] with this chain's seeds.
    pub fn at(&self, t: f64, epsilon: Option<Complex64>) -> Result<ChainPoint> {
        let seed = |eps: Complex64, t: f64| self.seed.solution(eps, t, &self.steps);
        darboux_chain(&seed, &self.seed.potential(), &self.radii(), t, epsilon)
    }

    /// Final potential `f_n(t)`.
    pub fn potential(&self, t: f64) -> Result<f64> {
        Ok(*self.at(t, None)?.potentials.last().expect("base potential is always present"))
    }

    /// Transformed seed solution at spectral value `epsilon`.
    pub fn spinor(&self, epsilon: Complex64, t: f64) -> Result<Spinor2> {
        Ok(self.at(t, Some(epsilon))?.spinor.expect("requested spinor"))
    }

    /// Pair of step `k` as a function of time.
    pub fn pair(&self, k: usize) -> Result<DarbouxPair> {
        let step = self
            .steps
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("chain has no step {k}")))?;
        let spec = self.truncated(k + 1);
        Ok(DarbouxPair::new(step.radius, move |t| Ok(spec.at(t, None)?.pairs[k])))
    }

    /// Potential before step `k` (`k = 0` is the seed potential).
    pub fn potential_before(&self, k: usize) -> PotentialSpec {
        if k == 0 {
            self.seed.potential()
        } else {
            PotentialSpec::Chain(self.truncated(k))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::Case1Params;
    use crate::numerics::{TimeGrid, Trajectory};
    use crate::seeds::{constant_seed, constants_for_phase, ConstantSeedParams};
    use crate::system::{residual, TwoLevelSystem};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn p_vector_examples() {
        let p = p_vector(&Spinor2::from_re(1.0, 0.0));
        assert_eq!(p.0, [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let p = p_vector(&Spinor2::from_re(1.0, 1.0));
        assert_eq!(p.0, [c(0.0, 0.0), c(0.0, 2.0), c(-2.0, 0.0)]);
        assert_eq!(p.square(), c(0.0, 0.0));
    }

    #[test]
    fn p_vector_matches_definition() {
        let psi = Spinor2::new(c(0.3, -1.2), c(2.0, 0.7));
        let a = p_vector(&psi);
        let b = p_vector_by_definition(&psi);
        for k in 0..3 {
            assert!((a.0[k] - b.0[k]).norm() < 1e-14);
        }
        assert!(a.isotropy_residual() < 1e-15);
    }

    #[test]
    fn conjugate_spinor_is_orthogonal() {
        let psi = Spinor2::new(c(0.3, -1.2), c(2.0, 0.7));
        assert!(spinor_inner(&conjugate_spinor(&psi), &psi).norm() < 1e-15);
    }

    #[test]
    fn alpha_beta_ignore_global_phase() {
        let seed = ConstantSeedParams::new(0.3, c(0.0, -1.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let psi = constant_seed(&seed, 0.4);
        let (a, b) = alpha_beta_from_p(&p_vector(&psi), 1.0).unwrap();
        let (a2, b2) = alpha_beta_from_p(&p_vector(&(psi * c(-0.6, 0.8))), 1.0).unwrap();
        assert!((a - a2).abs() < 1e-14 && (b - b2).abs() < 1e-14);
        assert!((a * a + b * b - 1.0).abs() < 1e-13);
    }

    #[test]
    fn alpha_beta_errors() {
        let p = p_vector(&Spinor2::from_re(1.0, 0.0));
        assert!(matches!(alpha_beta_from_p(&p, 1.0), Err(Error::DegenerateP { .. })));
        let p = p_vector(&Spinor2::new(c(1.0, 0.0), c(0.3, 0.9)));
        assert!(matches!(alpha_beta_from_p(&p, 1.0), Err(Error::RealityViolated { .. })));
        assert!(alpha_beta_from_p(&p, 0.0).is_err());
    }

    #[test]
    fn transform_matches_dressing_matrix() {
        let psi = Spinor2::new(c(0.3, -1.2), c(2.0, 0.7));
        let eps = c(0.8, -0.1);
        let direct = transform_spinor(0.6, -0.8, eps, &psi);
        let via = Spinor2::from_vector(&(dressing_matrix(0.6, -0.8, eps) * psi.to_vector()));
        assert!((direct - via).norm() < 1e-15);
    }

    #[test]
    fn p_form_is_rescaled_transform() {
        let (c0, r, gamma) = (0.3, 1.7, 0.2);
        let (p0, q0) = constants_for_phase(c0, r, gamma).unwrap();
        let seed = ConstantSeedParams::new(c0, c(0.0, -r), p0, q0).unwrap();
        let other = ConstantSeedParams::new(c0, c(0.9, 0.0), c(1.0, 0.0), c(0.4, 0.0)).unwrap();
        for t in [-1.0, 0.0, 0.7] {
            let p = p_vector(&constant_seed(&seed, t)).phase_normalized().unwrap();
            let (a, b) = alpha_beta_from_p(&p, r).unwrap();
            let psi = constant_seed(&other, t);
            let lhs = transform_spinor_p_form(&p, other.epsilon, r, &psi).unwrap();
            let rhs = transform_spinor(a, b, other.epsilon, &psi) * (-1.0 / r);
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
            let f_unscaled = potential_from_p_unscaled(&p, c0).unwrap();
            assert!(((transformed_potential(b, c0) + c0) - r * (f_unscaled + c0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_parametrization() {
        let mu = mu_from_alpha_beta(0.0, 2.0, 2.0).unwrap();
        assert!((mu - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(matches!(mu_from_alpha_beta(1.0, 1.0, 1.0), Err(Error::InconsistentPair { .. })));
    }

    #[test]
    fn single_step_chain_matches_first_family() {
        let (c0, r, gamma) = (0.3, 1.0, 0.4);
        let chain = ChainSpec::new(SeedFamily::Constant { c0 }, vec![ChainStep::new(r, gamma)]).unwrap();
        let closed = Case1Params::new(r, c0, gamma).unwrap();
        for t in [-3.0, -0.5, 0.0, 1.25, 4.0] {
            let f_chain = chain.potential(t).unwrap();
            let f_closed = closed.potential(t).unwrap();
            assert!((f_chain - f_closed).abs() < 1e-12, "t={t}: {f_chain} vs {f_closed}");
        }
    }

    #[test]
    fn transformed_solution_solves_new_system() {
        let chain = ChainSpec::new(SeedFamily::Constant { c0: 0.3 }, vec![ChainStep::new(1.0, 0.0)]).unwrap();
        let eps = c(0.8, 0.0);
        let grid = TimeGrid::uniform(-4.0, 4.0, 801).unwrap();
        let traj = Trajectory::sample(&grid, |t| chain.spinor(eps, t)).unwrap();
        let sys = TwoLevelSystem::new(eps, PotentialSpec::Chain(chain.clone())).unwrap();
        assert!(residual(&traj, &sys).unwrap() < 1e-8);
    }

    #[test]
    fn chain_rejects_repeated_radius() {
        let steps = vec![ChainStep::new(1.0, 0.0), ChainStep::new(-1.0, 0.0)];
        assert!(ChainSpec::new(SeedFamily::Constant { c0: 0.3 }, steps).is_err());
    }

    #[test]
    fn chain_step_errors_carry_index() {
        let seed = |_: Complex64, _: f64| Ok(Spinor2::from_re(1.0, 0.0));
        let err = darboux_chain(&seed, &PotentialSpec::constant(0.0).unwrap(), &[1.0], 0.5, None).unwrap_err();
        match err {
            Error::ChainStep { step, source } => {
                assert_eq!(step, 0);
                assert_eq!(*source, Error::DegenerateP { t: 0.5 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
