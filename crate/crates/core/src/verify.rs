//! Invariant and residual checks producing [`CheckReport`]s.
//!
//! Differential checks on a [`DarbouxPair`] evaluate the pair off-grid and use
//! a fourth-order central difference with step [`FD_STEP`] at every grid
//! sample. Checks on a [`Trajectory`] difference the stored samples.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::darboux::{intertwining_matrix, p_vector, transformed_potential, DarbouxPair, PVector};
use crate::error::{Error, Result};
use crate::numerics::{grid_derivative, try_finite_difference, TimeGrid, Trajectory, GRID_STENCIL_HALF_WIDTH};
use crate::system::{frobenius, pauli, residual_profile, Mat2, PotentialSpec, Spinor2, TwoLevelSystem};

pub const FIRST_INTEGRAL_TOL: f64 = 1e-10;
pub const ODE_TOL: f64 = 1e-6;
pub const P_EVOLUTION_TOL: f64 = 1e-6;
pub const ISOTROPY_TOL: f64 = 1e-12;
pub const ALGEBRAIC_TOL: f64 = 1e-14;
pub const SOLUTION_TOL: f64 = 1e-7;
/// Step of the pointwise central differences.
pub const FD_STEP: f64 = 1e-3;
/// Relative size of the corruption applied by the negative controls.
pub const CORRUPTION_LEVEL: f64 = 1e-3;

const MIN_SAMPLES: usize = 9;

/// Outcome of one check on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check_name: String,
    pub grid: TimeGrid,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
    pub worst_t: f64,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check_name: impl Into<String>, grid: &TimeGrid, max_residual: f64, threshold: f64, worst_t: f64) -> Self {
        CheckReport {
            check_name: check_name.into(),
            grid: grid.clone(),
            max_residual,
            threshold,
            passed: max_residual <= threshold,
            worst_t,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self.passed = self.max_residual <= threshold;
        self
    }
}

/// Running maximum that keeps the location; NaN always wins.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    t: f64,
}

impl Worst {
    fn new(t: f64) -> Self {
        Worst { value: 0.0, t }
    }

    fn update(&mut self, value: f64, t: f64) {
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            self.value = value;
            self.t = t;
        }
    }
}

fn require_samples(grid: &TimeGrid) -> Result<()> {
    if grid.len() < MIN_SAMPLES {
        return Err(Error::GridTooCoarse { samples: grid.len(), required: MIN_SAMPLES });
    }
    Ok(())
}

fn start(grid: &TimeGrid) -> f64 {
    grid.samples().first().copied().unwrap_or(f64::NAN)
}

/// `max |α² + β² − R²| / R²`.
pub fn check_first_integral(pair: &DarbouxPair, grid: &TimeGrid) -> Result<CheckReport> {
    let r2 = pair.radius() * pair.radius();
    let mut worst = Worst::new(start(grid));
    for &t in grid.samples() {
        let (a, b) = pair.alpha_beta(t)?;
        worst.update((a * a + b * b - r2).abs() / r2, t);
    }
    Ok(CheckReport::new("first_integral", grid, worst.value, FIRST_INTEGRAL_TOL, worst.t))
}

fn pair_derivative(pair: &DarbouxPair, t: f64) -> Result<(f64, f64)> {
    let da = try_finite_difference(|s| Ok(pair.alpha_beta(s)?.0), t, FD_STEP)?;
    let db = try_finite_difference(|s| Ok(pair.alpha_beta(s)?.1), t, FD_STEP)?;
    Ok((da, db))
}

/// `α̇ − 2β(f − β) = 0`, `β̇ + 2α(f − β) = 0`; the larger of the two
/// absolute residuals.
pub fn check_alpha_beta_ode(pair: &DarbouxPair, f: &PotentialSpec, grid: &TimeGrid) -> Result<CheckReport> {
    require_samples(grid)?;
    let mut worst = Worst::new(start(grid));
    for &t in grid.samples() {
        let (a, b) = pair.alpha_beta(t)?;
        let fv = f.eval(t)?;
        let (da, db) = pair_derivative(pair, t)?;
        let r = (da - 2.0 * b * (fv - b)).abs().max((db + 2.0 * a * (fv - b)).abs());
        worst.update(r, t);
    }
    Ok(CheckReport::new("alpha_beta_ode", grid, worst.value, ODE_TOL, worst.t))
}

/// Shifts `mu` by a multiple of `2π` to the representative nearest `reference`.
fn nearest_branch(mu: f64, reference: f64) -> f64 {
    mu - 2.0 * PI * ((mu - reference) / (2.0 * PI)).round()
}

/// `μ̇ = 2(R sin μ − f)` with `α = R cos μ`, `β = R sin μ`. `μ` is unwrapped
/// along the grid.
pub fn check_mu_equation(pair: &DarbouxPair, f: &PotentialSpec, grid: &TimeGrid) -> Result<CheckReport> {
    require_samples(grid)?;
    let r = pair.radius();
    let mu_at = |t: f64| -> Result<f64> {
        let (a, b) = pair.alpha_beta(t)?;
        Ok((b / r).atan2(a / r))
    };
    let mut previous: Option<f64> = None;
    let mut worst = Worst::new(start(grid));
    for &t in grid.samples() {
        let raw = mu_at(t)?;
        let mu = match previous {
            None => raw,
            Some(prev) => {
                let mu = nearest_branch(raw, prev);
                if (mu - prev).abs() > FRAC_PI_2 {
                    return Err(Error::UnwrapFailure { t });
                }
                mu
            }
        };
        previous = Some(mu);
        let dmu = try_finite_difference(|s| Ok(nearest_branch(mu_at(s)?, mu)), t, FD_STEP)?;
        let res = (dmu - 2.0 * (r * mu.sin() - f.eval(t)?)).abs();
        worst.update(res, t);
    }
    Ok(CheckReport::new("mu_equation", grid, worst.value, ODE_TOL, worst.t))
}

/// `ṗ = 2 F×p` along a sampled solution, plus the isotropy `p·p = 0`.
///
/// Returns two reports, `p_evolution` (relative to `max(1, |p|)`) and
/// `isotropy` (`|p·p| / |p|²`).
pub fn check_p_evolution(traj: &Trajectory, sys: &TwoLevelSystem) -> Result<Vec<CheckReport>> {
    require_samples(&traj.grid)?;
    let grid = &traj.grid;
    let ps: Vec<[Complex64; 3]> = traj.states.iter().map(|s| p_vector(s).0).collect();
    let n = ps.len();
    let columns: Vec<Vec<Complex64>> = (0..3).map(|k| ps.iter().map(|p| p[k]).collect()).collect();
    let k = GRID_STENCIL_HALF_WIDTH;
    let mut evolution = Worst::new(grid.samples()[k]);
    let mut isotropy = Worst::new(start(grid));
    for (i, &t) in grid.samples().iter().enumerate() {
        let p = PVector(ps[i]);
        isotropy.update(p.isotropy_residual(), t);
        if i < k || i + k >= n {
            continue;
        }
        let field = sys.field(t)?;
        let rhs = field.cross(&ps[i]);
        let mut r2 = 0.0;
        for (k, column) in columns.iter().enumerate() {
            let d = grid_derivative(grid, column, i).expect("interior index");
            r2 += (d - 2.0 * rhs[k]).norm_sqr();
        }
        evolution.update(r2.sqrt() / p.norm().max(1.0), t);
    }
    Ok(vec![
        CheckReport::new("p_evolution", grid, evolution.value, P_EVOLUTION_TOL, evolution.t),
        CheckReport::new("isotropy", grid, isotropy.value, ISOTROPY_TOL, isotropy.t),
    ])
}

/// Residuals of the two intertwining relations
///
/// ```text
/// σ₁B − Bσ₁ + σ₂(f₁ − f) = 0
/// σ₁Ḃ + σ₂B f₁ − σ₂ḟ − Bσ₂ f = 0
/// ```
///
/// for `B = α + i(f − β)σ₃` and `f₁ = 2β − f`. Returns the `intertwining_algebraic`
/// and `intertwining_differential` reports.
pub fn check_intertwining(f: &PotentialSpec, pair: &DarbouxPair, grid: &TimeGrid) -> Result<Vec<CheckReport>> {
    check_intertwining_with(f, pair, grid, intertwining_matrix, transformed_potential)
}

/// [`check_intertwining`] with a caller-supplied `B(α, β, f)` and `f₁(β, f)`,
/// used by the negative controls.
pub fn check_intertwining_with(
    f: &PotentialSpec,
    pair: &DarbouxPair,
    grid: &TimeGrid,
    b_matrix: impl Fn(f64, f64, f64) -> Mat2,
    new_potential: impl Fn(f64, f64) -> f64,
) -> Result<Vec<CheckReport>> {
    require_samples(grid)?;
    let (s1, s2) = (pauli(1), pauli(2));
    let b_at = |t: f64| -> Result<Mat2> {
        let (a, b) = pair.alpha_beta(t)?;
        Ok(b_matrix(a, b, f.eval(t)?))
    };
    let mut algebraic = Worst::new(start(grid));
    let mut differential = Worst::new(start(grid));
    for &t in grid.samples() {
        let (_, beta) = pair.alpha_beta(t)?;
        let fv = f.eval(t)?;
        let f1 = new_potential(beta, fv);
        let b = b_at(t)?;
        let r13 = s1 * b - b * s1 + s2 * Complex64::new(f1 - fv, 0.0);
        algebraic.update(frobenius(&r13), t);

        let db = differentiate_matrix(&b_at, t)?;
        let df = try_finite_difference(|s| f.eval(s), t, FD_STEP)?;
        let r14 = s1 * db + s2 * b * Complex64::new(f1, 0.0)
            - s2 * Complex64::new(df, 0.0)
            - b * s2 * Complex64::new(fv, 0.0);
        differential.update(frobenius(&r14), t);
    }
    Ok(vec![
        CheckReport::new("intertwining_algebraic", grid, algebraic.value, ALGEBRAIC_TOL, algebraic.t),
        CheckReport::new("intertwining_differential", grid, differential.value, ODE_TOL, differential.t),
    ])
}

fn differentiate_matrix(b_at: &dyn Fn(f64) -> Result<Mat2>, t: f64) -> Result<Mat2> {
    let mut out = Mat2::zeros();
    for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        out[(r, c)] = try_finite_difference(|s| Ok(b_at(s)?[(r, c)]), t, FD_STEP)?;
    }
    Ok(out)
}

/// One residual report per spectral value: the sampled `spinor_source(ε, ·)`
/// must solve the two-level equation with potential `f1`.
pub fn verify_pair(
    f1: &PotentialSpec,
    spinor_source: &dyn Fn(Complex64, f64) -> Result<Spinor2>,
    epsilons: &[Complex64],
    grid: &TimeGrid,
) -> Result<Vec<CheckReport>> {
    require_samples(grid)?;
    let mut reports = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let traj = Trajectory::sample(grid, |t| spinor_source(eps, t))?;
        if traj.states.iter().all(|s| s.norm() == 0.0) {
            return Err(Error::DegenerateInput);
        }
        let sys = TwoLevelSystem::new(eps, f1.clone())?;
        let (max, worst_t) = residual_profile(&traj, &sys)?;
        reports.push(
            CheckReport::new("solution_residual", grid, max, SOLUTION_TOL, worst_t)
                .with_note(format!("epsilon = {}{:+}i", eps.re, eps.im)),
        );
    }
    Ok(reports)
}

/// Everything needed to run the full set of checks on one transformation.
pub struct FamilyCase<'a> {
    pub name: &'a str,
    pub pair: DarbouxPair,
    /// Potential the pair was built on.
    pub base: PotentialSpec,
    /// Transformed potential `2β − f`.
    pub transformed: PotentialSpec,
    /// Solutions of the transformed problem.
    pub solutions: &'a dyn Fn(Complex64, f64) -> Result<Spinor2>,
}

fn prefixed(name: &str, mut reports: Vec<CheckReport>) -> Vec<CheckReport> {
    for r in &mut reports {
        r.check_name = format!("{name}/{}", r.check_name);
    }
    reports
}

/// First integral, α/β equations, μ-equation, both intertwining relations,
/// and solution residuals for each `epsilon`.
pub fn verify_family(case: &FamilyCase<'_>, grid: &TimeGrid, epsilons: &[Complex64]) -> Result<Vec<CheckReport>> {
    let mut reports = vec![
        check_first_integral(&case.pair, grid)?,
        check_alpha_beta_ode(&case.pair, &case.base, grid)?,
        check_mu_equation(&case.pair, &case.base, grid)?,
    ];
    reports.extend(check_intertwining(&case.base, &case.pair, grid)?);
    reports.extend(verify_pair(&case.transformed, case.solutions, epsilons, grid)?);
    Ok(prefixed(case.name, reports))
}

/// Pair with `β` scaled by `1 + level`.
pub fn corrupt_pair(pair: &DarbouxPair, level: f64) -> DarbouxPair {
    let inner = pair.clone();
    DarbouxPair::new(pair.radius(), move |t| {
        let (a, b) = inner.alpha_beta(t)?;
        Ok((a, b * (1.0 + level)))
    })
}

/// Multiplies every sample by `1 + level·sin(37t)`, which is not a solution.
pub fn corrupt_trajectory(traj: &Trajectory, level: f64) -> Trajectory {
    let mut out = traj.clone();
    for (s, &t) in out.states.iter_mut().zip(traj.grid.samples()) {
        *s = *s * (1.0 + level * (37.0 * t).sin());
    }
    out
}

/// `B` with the sign of its `σ₃` part reversed.
pub fn flipped_intertwining_matrix(alpha: f64, beta: f64, f_value: f64) -> Mat2 {
    intertwining_matrix(alpha, beta, f_value).adjoint()
}

/// The same checks as [`verify_family`] run on corrupted inputs: the pair is
/// scaled by [`CORRUPTION_LEVEL`], `B` has its `σ₃` sign flipped, and the
/// solutions are modulated at that level. Every returned report is expected
/// to fail.
pub fn negative_controls(case: &FamilyCase<'_>, grid: &TimeGrid, epsilons: &[Complex64]) -> Result<Vec<CheckReport>> {
    let bad = corrupt_pair(&case.pair, CORRUPTION_LEVEL);
    let mut reports = vec![
        check_first_integral(&bad, grid)?,
        check_alpha_beta_ode(&bad, &case.base, grid)?,
        check_mu_equation(&bad, &case.base, grid)?,
    ];
    let flipped = check_intertwining_with(
        &case.base,
        &case.pair,
        grid,
        flipped_intertwining_matrix,
        transformed_potential,
    )?;
    reports.push(flipped[0].clone());
    let corrupted = check_intertwining(&case.base, &bad, grid)?;
    reports.push(corrupted[1].clone());
    let solutions = case.solutions;
    let source = |eps: Complex64, t: f64| -> Result<Spinor2> {
        Ok(solutions(eps, t)? * (1.0 + CORRUPTION_LEVEL * (37.0 * t).sin()))
    };
    reports.extend(verify_pair(&case.transformed, &source, epsilons, grid)?);
    Ok(prefixed(&format!("{}/negative", case.name), reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::Case1Params;
    use crate::seeds::{constant_seed, ConstantSeedParams};

    fn grid() -> TimeGrid {
        TimeGrid::uniform(-5.0, 5.0, 201).unwrap()
    }

    fn case1() -> Case1Params {
        Case1Params::new(1.0, 0.3, 0.2).unwrap()
    }

    #[test]
    fn report_pass_flag_follows_threshold() {
        let g = grid();
        assert!(CheckReport::new("x", &g, 1e-11, 1e-10, 0.0).passed);
        assert!(!CheckReport::new("x", &g, 2e-10, 1e-10, 0.0).passed);
        assert!(!CheckReport::new("x", &g, f64::NAN, 1e-10, 0.0).passed);
        assert!(CheckReport::new("x", &g, 2e-10, 1e-10, 0.0).with_threshold(1e-9).passed);
    }

    #[test]
    fn constant_pair_has_zero_residuals() {
        let pair = DarbouxPair::new(2.0, |_| Ok((2.0, 0.0)));
        let f = PotentialSpec::constant(0.0).unwrap();
        let g = grid();
        assert_eq!(check_first_integral(&pair, &g).unwrap().max_residual, 0.0);
        // the difference stencil on a constant leaves only roundoff
        assert!(check_alpha_beta_ode(&pair, &f, &g).unwrap().max_residual < 1e-12);
        assert!(check_mu_equation(&pair, &f, &g).unwrap().max_residual < 1e-12);
    }

    #[test]
    fn case1_pair_passes_pair_checks() {
        let p = case1();
        let g = grid();
        let f = p.base_potential();
        assert!(check_first_integral(&p.pair(), &g).unwrap().passed);
        assert!(check_alpha_beta_ode(&p.pair(), &f, &g).unwrap().passed);
        assert!(check_mu_equation(&p.pair(), &f, &g).unwrap().passed);
        for r in check_intertwining(&f, &p.pair(), &g).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn perturbed_beta_fails_first_integral() {
        let p = case1().pair();
        let bad = DarbouxPair::new(p.radius(), move |t| {
            let (a, b) = p.alpha_beta(t)?;
            Ok((a, b + 1e-4))
        });
        assert!(!check_first_integral(&bad, &grid()).unwrap().passed);
    }

    #[test]
    fn flipped_b_breaks_algebraic_relation() {
        let p = case1();
        let reports = check_intertwining_with(
            &p.base_potential(),
            &p.pair(),
            &grid(),
            flipped_intertwining_matrix,
            transformed_potential,
        )
        .unwrap();
        assert!(!reports[0].passed);
    }

    #[test]
    fn unchanged_potential_gives_twice_the_gap() {
        // with f₁ replaced by f the algebraic residual is ‖2(f − β)σ₂‖ = √2|f₁ − f|
        let p = case1();
        let f = p.base_potential();
        let g = TimeGrid::uniform(-1.0, 1.0, 9).unwrap();
        let reports = check_intertwining_with(&f, &p.pair(), &g, intertwining_matrix, |_, fv| fv).unwrap();
        let expected = g
            .samples()
            .iter()
            .map(|&t| 2.0_f64.sqrt() * (p.potential(t).unwrap() - f.eval(t).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!((reports[0].max_residual - expected).abs() < 1e-13);
    }

    #[test]
    fn p_evolution_of_integrated_seed() {
        let seed = ConstantSeedParams::new(0.3, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        let g = TimeGrid::uniform(-5.0, 5.0, 1001).unwrap();
        let sys = TwoLevelSystem::new(seed.epsilon, PotentialSpec::constant(0.3).unwrap()).unwrap();
        let traj = sys.integrate(constant_seed(&seed, -5.0), &g, 1e-11, 1e-13).unwrap();
        for r in check_p_evolution(&traj, &sys).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        let bad = corrupt_trajectory(&traj, CORRUPTION_LEVEL);
        assert!(!check_p_evolution(&bad, &sys).unwrap()[0].passed);
    }

    #[test]
    fn static_spinor_has_zero_p_evolution() {
        let g = grid();
        let traj = Trajectory::sample(&g, |_| Ok(Spinor2::from_re(0.6, 0.8))).unwrap();
        let sys = TwoLevelSystem::new(Complex64::new(0.0, 0.0), PotentialSpec::constant(0.0).unwrap()).unwrap();
        let r = check_p_evolution(&traj, &sys).unwrap();
        assert!(r[0].max_residual < 1e-12);
    }

    #[test]
    fn verify_pair_accepts_solutions_and_rejects_zero() {
        let p = case1();
        let f1 = PotentialSpec::Case1(p);
        let g = TimeGrid::uniform(-5.0, 5.0, 1001).unwrap();
        let eps = [0.5, 1.0, 2.0].map(|e| Complex64::new(e, 0.0));
        let source = |e: Complex64, t: f64| p.transformed_spinor(e, t);
        for r in verify_pair(&f1, &source, &eps, &g).unwrap() {
            assert!(r.passed, "{r:?}");
        }
        let untransformed = |e: Complex64, t: f64| crate::seeds::SeedFamily::Constant { c0: 0.3 }.solution(e, t, &[]);
        assert!(verify_pair(&f1, &untransformed, &eps, &g).unwrap().iter().all(|r| !r.passed));
        let zero = |_: Complex64, _: f64| Ok(Spinor2::ZERO);
        assert_eq!(verify_pair(&f1, &zero, &eps, &g).unwrap_err(), Error::DegenerateInput);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = TimeGrid::uniform(0.0, 1.0, 5).unwrap();
        let f = PotentialSpec::constant(0.0).unwrap();
        assert!(matches!(
            check_alpha_beta_ode(&case1().pair(), &f, &g),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn unwrap_detects_jumps() {
        let pair = DarbouxPair::new(1.0, |t| Ok(if t < 0.0 { (1.0, 0.0) } else { (-1.0, 0.0) }));
        let f = PotentialSpec::constant(0.0).unwrap();
        assert!(matches!(check_mu_equation(&pair, &f, &grid()), Err(Error::UnwrapFailure { .. })));
    }
}
