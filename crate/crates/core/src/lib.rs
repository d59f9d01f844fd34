//! Darboux transformations for the two-level system `i dΨ/dt = (σ·F)Ψ`,
//! `F = (ε, 0, f(t))`.
//!
//! Starting from an exactly solvable real potential `f` and its solutions, a
//! single solution at the imaginary spectral value `ε = -iR` fixes a pair of
//! real functions `α(t)`, `β(t)`. The algebraic map
//!
//! ```text
//! Φ_ε = [α - i(ε σ₁ + β σ₃)] Ψ_ε,        f₁ = 2β - f
//! ```
//!
//! then carries every solution `Ψ_ε` of the old problem to a solution `Φ_ε` of
//! the same two-level equation with the new real potential `f₁`.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: time grids, an adaptive Runge–Kutta integrator and finite
//!   differences used as independent oracles;
//! * [`hypergeom`]: the Gauss function `2F1` needed by the tanh-step seeds;
//! * [`system`]: the two-level equation, the potential catalogue, residuals and
//!   the Zakharov–Shabat correspondence;
//! * [`seeds`]: closed-form seed solutions;
//! * [`darboux`]: the transformation engine and iterated chains;
//! * [`closed_forms`]: the three explicit families of new potentials;
//! * [`verify`]: invariant checks producing [`verify::CheckReport`]s.
//!
//! ```
//! use darboux2l::closed_forms::Case1Params;
//!
//! // c0 = 0 reduces the first family to a sech pulse 2 R0 / cosh(2 R0 t)
//! let case1 = Case1Params::new(1.0, 0.0, 0.0).unwrap();
//! let f1 = case1.potential(0.0).unwrap();
//! assert!((f1 - 2.0).abs() < 1e-15);
//! ```

pub mod closed_forms;
pub mod darboux;
pub mod error;
pub mod hypergeom;
pub mod numerics;
pub mod seeds;
mod spinor;
pub mod system;
pub mod verify;

#[cfg(doctest)]
mod guide;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spinor::Spinor2;
