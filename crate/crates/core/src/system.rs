//! The two-level equation `i dΨ/dt = (σ·F)Ψ` with `F = (ε, 0, f(t))`, its
//! potential catalogue, and the correspondence with the Zakharov–Shabat form.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::closed_forms::{Case1Params, Case2Params, Case3Params};
use crate::darboux::ChainSpec;
use crate::error::{Error, Result};
use crate::numerics::{grid_derivative, rk_integrate, TimeGrid, Trajectory, GRID_STENCIL_HALF_WIDTH};

pub use crate::spinor::Spinor2;

pub type Mat2 = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pauli matrices `σ₁, σ₂, σ₃` (`k = 1, 2, 3`); `k = 0` is the identity.
pub fn pauli(k: usize) -> Mat2 {
    match k {
        0 => Mat2::new(ONE, ZERO, ZERO, ONE),
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Frobenius norm of a complex 2×2 matrix.
pub fn frobenius(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A real potential `f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `f = c0`
    Constant { c0: f64 },
    /// `f = r0 / cosh(t/T)`
    Sech { r0: f64, t_scale: f64 },
    /// `f = (r0/T) tanh(t/T) + r1/T`
    TanhStep { r0: f64, r1: f64, t_scale: f64 },
    /// First Darboux family built on a constant potential.
    Case1(Case1Params),
    /// Twice-transformed constant potential.
    Case2(Case2Params),
    /// Darboux transform of the tanh step.
    Case3(Case3Params),
    /// Potential `f_k` after every step of an iterated transformation,
    /// evaluated numerically from the seeds.
    Chain(ChainSpec),
    /// Linear interpolation of samples.
    Tabulated { grid: TimeGrid, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn constant(c0: f64) -> Result<Self> {
        let spec = PotentialSpec::Constant { c0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sech(r0: f64, t_scale: f64) -> Result<Self> {
        let spec = PotentialSpec::Sech { r0, t_scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tanh_step(r0: f64, r1: f64, t_scale: f64) -> Result<Self> {
        let spec = PotentialSpec::TanhStep { r0, r1, t_scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tabulated(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        let spec = PotentialSpec::Tabulated { grid, values };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the parameter invariants that do not depend on the time grid.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            PotentialSpec::Constant { c0 } => finite(&[*c0]),
            PotentialSpec::Sech { r0, t_scale } => finite(&[*r0, *t_scale]) && *t_scale != 0.0,
            PotentialSpec::TanhStep { r0, r1, t_scale } => {
                finite(&[*r0, *r1, *t_scale]) && *t_scale != 0.0
            }
            // validated on construction
            PotentialSpec::Case1(_) | PotentialSpec::Case2(_) | PotentialSpec::Case3(_) => true,
            PotentialSpec::Chain(c) => c.validate().is_ok(),
            PotentialSpec::Tabulated { grid, values } => values.len() == grid.len() && finite(values),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid potential {self:?}")))
        }
    }

    /// Value `f(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        potential_eval(self, t)
    }
}

/// Evaluates `f(t)` for any catalogue entry.
pub fn potential_eval(spec: &PotentialSpec, t: f64) -> Result<f64> {
    let value = match spec {
        PotentialSpec::Constant { c0 } => *c0,
        PotentialSpec::Sech { r0, t_scale } => r0 / (t / t_scale).cosh(),
        PotentialSpec::TanhStep { r0, r1, t_scale } => (r0 * (t / t_scale).tanh() + r1) / t_scale,
        PotentialSpec::Case1(p) => p.potential(t).map_err(singular)?,
        PotentialSpec::Case2(p) => p.potential(t).map_err(singular)?,
        PotentialSpec::Case3(p) => p.potential(t).map_err(singular)?,
        PotentialSpec::Chain(c) => c.potential(t)?,
        PotentialSpec::Tabulated { grid, values } => interpolate(grid, values, t)?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteValue { t })
    }
}

fn singular(e: Error) -> Error {
    match e {
        Error::PoleHit { t } | Error::ZeroA { t } => Error::SingularPotential { t },
        other => other,
    }
}

fn interpolate(grid: &TimeGrid, values: &[f64], t: f64) -> Result<f64> {
    let s = grid.samples();
    if !(t >= grid.t_start() && t <= grid.t_end()) {
        return Err(Error::OutOfRange {
            t,
            start: grid.t_start(),
            end: grid.t_end(),
        });
    }
    let hi = s.partition_point(|&x| x < t).clamp(1, s.len() - 1);
    let lo = hi - 1;
    let w = (t - s[lo]) / (s[hi] - s[lo]);
    Ok(values[lo] * (1.0 - w) + values[hi] * w)
}

/// The generator `σ·F = ((f, ε), (ε, -f))`.
pub fn hamiltonian_matrix(f_value: f64, epsilon: Complex64) -> Mat2 {
    let f = Complex64::new(f_value, 0.0);
    Mat2::new(f, epsilon, epsilon, -f)
}

/// `F = (ε, 0, f(t))` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector(pub [Complex64; 3]);

impl FieldVector {
    pub fn new(epsilon: Complex64, f_value: f64) -> Self {
        FieldVector([epsilon, ZERO, Complex64::new(f_value, 0.0)])
    }

    /// Bilinear cross product `F × p` (no conjugation).
    pub fn cross(&self, p: &[Complex64; 3]) -> [Complex64; 3] {
        let f = &self.0;
        [
            f[1] * p[2] - f[2] * p[1],
            f[2] * p[0] - f[0] * p[2],
            f[0] * p[1] - f[1] * p[0],
        ]
    }
}

/// Spectral parameter `ε` together with a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSystem {
    pub epsilon: Complex64,
    pub potential: PotentialSpec,
}

impl TwoLevelSystem {
    pub fn new(epsilon: Complex64, potential: PotentialSpec) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        potential.validate()?;
        Ok(TwoLevelSystem { epsilon, potential })
    }

    pub fn field(&self, t: f64) -> Result<FieldVector> {
        Ok(FieldVector::new(self.epsilon, self.potential.eval(t)?))
    }

    pub fn hamiltonian(&self, t: f64) -> Result<Mat2> {
        Ok(hamiltonian_matrix(self.potential.eval(t)?, self.epsilon))
    }

    /// `dΨ/dt = -i (σ·F) Ψ` for a known potential value.
    pub fn derivative(&self, f_value: f64, psi: &Spinor2) -> Spinor2 {
        let e = self.epsilon;
        Spinor2::new(
            -I * (f_value * psi.psi1 + e * psi.psi2),
            -I * (e * psi.psi1 - f_value * psi.psi2),
        )
    }

    /// Integrates the equation numerically from `psi0` at `grid.t_start()`.
    pub fn integrate(&self, psi0: Spinor2, grid: &TimeGrid, rel_tol: f64, abs_tol: f64) -> Result<Trajectory> {
        // surface potential failures instead of integrating NaNs
        for &t in grid.samples() {
            self.potential.eval(t)?;
        }
        rk_integrate(
            |t, y| {
                let f = self.potential.eval(t).unwrap_or(f64::NAN);
                self.derivative(f, y)
            },
            psi0,
            grid,
            rel_tol,
            abs_tol,
        )
    }
}

/// Largest residual of the two-level equation along a trajectory and where it
/// occurs.
pub fn residual_profile(traj: &Trajectory, sys: &TwoLevelSystem) -> Result<(f64, f64)> {
    const MIN_SAMPLES: usize = 9;
    let n = traj.len();
    if n < MIN_SAMPLES {
        return Err(Error::GridTooCoarse {
            samples: n,
            required: MIN_SAMPLES,
        });
    }
    let samples = traj.grid.samples();
    let k = GRID_STENCIL_HALF_WIDTH;
    let mut worst = (0.0_f64, samples[k]);
    for i in k..n - k {
        let t = samples[i];
        let psi = traj.states[i];
        let d = grid_derivative(&traj.grid, &traj.states, i).expect("interior index");
        let f = sys.potential.eval(t)?;
        // i dΨ/dt - (σ·F)Ψ = i (dΨ/dt - (-i σ·F Ψ))
        let r = (d - sys.derivative(f, &psi)).norm() / psi.norm().max(1.0);
        if !r.is_finite() {
            return Err(Error::NonFiniteValue { t });
        }
        if r > worst.0 {
            worst = (r, t);
        }
    }
    Ok(worst)
}

/// `max ‖i dΨ/dt − (σ·F)Ψ‖ / max(1, ‖Ψ‖)` over interior grid points, with the
/// derivative taken by seven-point finite differences on the trajectory grid.
pub fn residual(traj: &Trajectory, sys: &TwoLevelSystem) -> Result<f64> {
    residual_profile(traj, sys).map(|(r, _)| r)
}

/// `U = ½[1 + i(σ₁ + σ₂ + σ₃)]`.
pub fn zs_unitary() -> Mat2 {
    (pauli(0) + (pauli(1) + pauli(2) + pauli(3)) * I) * Complex64::new(0.5, 0.0)
}

/// Zakharov–Shabat generator `σ·F_ZS` with `F_ZS = (0, f, ε)`.
pub fn zs_generator(f_value: f64, epsilon: Complex64) -> Mat2 {
    pauli(2) * Complex64::new(f_value, 0.0) + pauli(3) * epsilon
}

/// Maps a Zakharov–Shabat spinor (already on the real-time side of the
/// reduction `f₂ = 0`) to the equivalent two-level problem.
///
/// Writing `Ψ_ZS = U Φ` turns `i dΨ_ZS/dτ = (σ·F_ZS)Ψ_ZS` into
/// `i dΦ/dτ = U†(σ·F_ZS)U Φ = (σ·F)Φ`, so the returned spinor is `U†Ψ_ZS`.
pub fn zs_to_two_level(
    zs_spinor: Spinor2,
    zs_potential: PotentialSpec,
    zs_epsilon: Complex64,
) -> Result<(Spinor2, TwoLevelSystem)> {
    let u = zs_unitary();
    let phi = u.adjoint() * zs_spinor.to_vector();
    Ok((Spinor2::from_vector(&phi), TwoLevelSystem::new(zs_epsilon, zs_potential)?))
}
