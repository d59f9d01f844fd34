use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Vector2;
use num_complex::Complex64;

/// State of the two-level system at one instant: `(psi1, psi2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor2 {
    pub psi1: Complex64,
    pub psi2: Complex64,
}

impl Spinor2 {
    pub const ZERO: Spinor2 = Spinor2 {
        psi1: Complex64::new(0.0, 0.0),
        psi2: Complex64::new(0.0, 0.0),
    };

    pub const fn new(psi1: Complex64, psi2: Complex64) -> Self {
        Spinor2 { psi1, psi2 }
    }

    pub fn from_re(psi1: f64, psi2: f64) -> Self {
        Spinor2::new(Complex64::new(psi1, 0.0), Complex64::new(psi2, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi1.norm_sqr() + self.psi2.norm_sqr()
    }

    /// Euclidean norm `sqrt(|psi1|^2 + |psi2|^2)`.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.psi1.is_finite() && self.psi2.is_finite()
    }

    pub fn map(self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Spinor2::new(f(self.psi1), f(self.psi2))
    }

    pub fn to_vector(self) -> Vector2<Complex64> {
        Vector2::new(self.psi1, self.psi2)
    }

    pub fn from_vector(v: &Vector2<Complex64>) -> Self {
        Spinor2::new(v[0], v[1])
    }
}

impl Add for Spinor2 {
    type Output = Spinor2;
    fn add(self, rhs: Spinor2) -> Spinor2 {
        Spinor2::new(self.psi1 + rhs.psi1, self.psi2 + rhs.psi2)
    }
}

impl Sub for Spinor2 {
    type Output = Spinor2;
    fn sub(self, rhs: Spinor2) -> Spinor2 {
        Spinor2::new(self.psi1 - rhs.psi1, self.psi2 - rhs.psi2)
    }
}

impl Neg for Spinor2 {
    type Output = Spinor2;
    fn neg(self) -> Spinor2 {
        Spinor2::new(-self.psi1, -self.psi2)
    }
}

impl Mul<f64> for Spinor2 {
    type Output = Spinor2;
    fn mul(self, rhs: f64) -> Spinor2 {
        Spinor2::new(self.psi1 * rhs, self.psi2 * rhs)
    }
}

impl Mul<Complex64> for Spinor2 {
    type Output = Spinor2;
    fn mul(self, rhs: Complex64) -> Spinor2 {
        Spinor2::new(self.psi1 * rhs, self.psi2 * rhs)
    }
}
