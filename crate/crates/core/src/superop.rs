//! 2×2 operators and 4×4 superoperators on row-major vectorised states.
//!
//! vec(ρ) = (ρ₁₁, ρ₁₂, ρ₂₁, ρ₂₂); vec(L X R) = (L ⊗ Rᵀ) vec(X). Superoperators
//! act from the left on this vector.

use crate::quadrature::QuadValue;
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub type Mat2 = [[Complex64; 2]; 2];

pub const ZERO2: Mat2 = [[Complex64::new(0.0, 0.0); 2]; 2];
pub const IDENTITY2: Mat2 = [
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Super(pub [[Complex64; 4]; 4]);

impl Super {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::sandwich(&IDENTITY2, &IDENTITY2)
    }

    /// X ↦ L X R.
    pub fn sandwich(left: &Mat2, right: &Mat2) -> Self {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[2 * i + j][2 * k + l] = left[i][k] * right[l][j];
                    }
                }
            }
        }
        Super(m)
    }

    /// X ↦ −i[H, X].
    pub fn commutator(h: &Mat2) -> Self {
        let mi = Complex64::new(0.0, -1.0);
        (Self::sandwich(h, &IDENTITY2) - Self::sandwich(&IDENTITY2, h)) * mi
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Super) -> Super {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Super(m)
    }

    pub fn apply(&self, x: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Super {
    type Output = Super;
    fn add(mut self, rhs: Super) -> Super {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for Super {
    type Output = Super;
    fn sub(mut self, rhs: Super) -> Super {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl Mul<f64> for Super {
    type Output = Super;
    fn mul(mut self, rhs: f64) -> Super {
        self.0.iter_mut().flatten().for_each(|a| *a *= rhs);
        self
    }
}

impl Mul<Complex64> for Super {
    type Output = Super;
    fn mul(mut self, rhs: Complex64) -> Super {
        self.0.iter_mut().flatten().for_each(|a| *a *= rhs);
        self
    }
}

impl QuadValue for Super {
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
}
