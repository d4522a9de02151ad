//! System side: H_S = −Δσ_z/2, coupling A = [σ_x cos θ + σ_z sin θ]/2.
//!
//! Basis convention: index 1 is the ground state (σ_z = +1, energy −Δ/2),
//! index 2 the excited state. Free evolution gives ρ₁₂(t) = ρ₁₂(0)e^{+iΔt}.

use crate::bath::{lamb_shift, lamb_shift_at_zero, lamb_shift_derivative, spectral_density, BathSpec};
use crate::error::{invalid, Result};
use crate::scalar::Real;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec<T> {
    delta: T,
    theta: T,
}

impl<T: Real> QubitSpec<T> {
    pub fn new(delta: T, theta: T) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(invalid("delta", format!("must be > 0, got {delta}")));
        }
        if !(theta > T::zero() && theta < T::FRAC_PI_2()) {
            return Err(invalid("theta", format!("must lie strictly inside (0, π/2), got {theta}")));
        }
        Ok(Self { delta, theta })
    }

    /// Boundary angles θ = 0 and θ = π/2 are not physical inputs but are
    /// useful as limiting cases in tests.
    pub fn new_unchecked(delta: T, theta: T) -> Self {
        Self { delta, theta }
    }

    pub fn delta(&self) -> T {
        self.delta
    }
    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn coupling_matrix(&self) -> CouplingMatrix<T> {
        let half = T::lit(0.5);
        CouplingMatrix {
            a11: half * self.theta.sin(),
            a12: half * self.theta.cos(),
            a22: -half * self.theta.sin(),
        }
    }
}

/// Real symmetric 2×2 coupling operator in the energy basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix<T> {
    pub a11: T,
    pub a12: T,
    pub a22: T,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn a21(&self) -> T {
        self.a12
    }
}

/// Reduced 2×2 density matrix stored as (ρ₂₂, Re ρ₁₂, Im ρ₁₂).
///
/// Trace one and Hermiticity hold by construction; positivity does not, since
/// the perturbative dynamics can leave the physical cone.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QubitState {
    pub rho22: f64,
    pub re_rho12: f64,
    pub im_rho12: f64,
}

impl QubitState {
    pub fn new(rho22: f64, re_rho12: f64, im_rho12: f64) -> Self {
        Self { rho22, re_rho12, im_rho12 }
    }

    pub fn excited() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn ground() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn rho11(&self) -> f64 {
        1.0 - self.rho22
    }

    pub fn rho12(&self) -> Complex64 {
        Complex64::new(self.re_rho12, self.im_rho12)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.rho22, self.re_rho12, self.im_rho12]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    /// Row-major vectorisation (ρ₁₁, ρ₁₂, ρ₂₁, ρ₂₂).
    pub fn vectorized(&self) -> [Complex64; 4] {
        let z = self.rho12();
        [Complex64::new(self.rho11(), 0.0), z, z.conj(), Complex64::new(self.rho22, 0.0)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5;
        let half_gap = ((self.rho22 - 0.5).powi(2) + self.rho12().norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }
}

/// Golden-rule relaxation rate ν₁ = 2|A₁₂|²J(Δ) and T1 = 1/ν₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationRate {
    pub nu1: f64,
    pub t1: f64,
}

pub fn fgr_rate(qubit: &QubitSpec<f64>, bath: &BathSpec<f64>) -> RelaxationRate {
    let a = qubit.coupling_matrix();
    let nu1 = 2.0 * a.a12 * a.a12 * spectral_density(bath, qubit.delta());
    RelaxationRate { nu1, t1: 1.0 / nu1 }
}

/// Second-order quasi-asymptotic state:
/// ρ′₂₂ = −|A₁₂|²S′(−Δ), ρ′₁₂ = 2A₁₁A₁₂[S(−Δ) − S(0)]/Δ.
pub fn asymptotic_state(qubit: &QubitSpec<f64>, bath: &BathSpec<f64>) -> Result<QubitState> {
    let a = qubit.coupling_matrix();
    let d = qubit.delta();
    let rho22 = -a.a12 * a.a12 * lamb_shift_derivative(bath, -d)?;
    let rho12 = 2.0 * a.a11 * a.a12 * (lamb_shift(bath, -d)? - lamb_shift_at_zero(bath)) / d;
    Ok(QubitState::new(rho22, rho12, 0.0))
}
