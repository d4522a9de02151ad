//! Bath-side mathematics for the zero-temperature power-law bath.
//!
//! J(ω) = 2πλ² ω_c^{1−s} ω^s e^{−ω/ω_c} Θ(ω), its correlation function
//! C(t) = (1/π)∫J(ω)e^{−iωt}dω, and the principal-value shift
//! S(ω) = (1/π) P∫ J(ω′)/(ω − ω′) dω′.

use crate::error::{invalid, Result};
use crate::gamma::gamma;
use crate::quadrature::{integrate_half_line, integrate_points, Tolerance};
use crate::scalar::Real;
use num_complex::Complex;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec<T> {
    lambda2: T,
    s: T,
    omega_c: T,
}

impl<T: Real> BathSpec<T> {
    /// `lambda2 = 0` is accepted as the uncoupled reference; `s` must lie in (0, 1].
    pub fn new(lambda2: T, s: T, omega_c: T) -> Result<Self> {
        if !(lambda2 >= T::zero()) || !lambda2.is_finite() {
            return Err(invalid("lambda2", format!("must be finite and ≥ 0, got {lambda2}")));
        }
        if !(omega_c > T::zero()) || !omega_c.is_finite() {
            return Err(invalid("omega_c", format!("must be finite and > 0, got {omega_c}")));
        }
        if !(s > T::zero() && s <= T::one()) {
            return Err(invalid("s", format!("must lie in (0, 1], got {s}")));
        }
        Ok(Self { lambda2, s, omega_c })
    }

    pub fn lambda2(&self) -> T {
        self.lambda2
    }
    pub fn s(&self) -> T {
        self.s
    }
    pub fn omega_c(&self) -> T {
        self.omega_c
    }

    pub fn is_sub_ohmic(&self) -> bool {
        self.s < T::one()
    }

    /// Same bath with a different coupling.
    pub fn with_lambda2(&self, lambda2: T) -> Result<Self> {
        Self::new(lambda2, self.s, self.omega_c)
    }

    /// Prefactor of the closed-form correlation, 2λ²ω_c^{1−s}Γ(s+1).
    pub fn correlation_prefactor(&self) -> T {
        T::lit(2.0) * self.lambda2 * self.omega_c.powf(T::one() - self.s) * gamma(self.s + T::one())
    }
}

pub fn spectral_density<T: Real>(bath: &BathSpec<T>, omega: T) -> T {
    if omega <= T::zero() {
        return T::zero();
    }
    T::lit(2.0) * T::PI() * bath.lambda2 * bath.omega_c.powf(T::one() - bath.s) * omega.powf(bath.s) * (-omega / bath.omega_c).exp()
}

/// dJ/dω (zero for ω ≤ 0).
pub fn spectral_density_derivative<T: Real>(bath: &BathSpec<T>, omega: T) -> T {
    if omega <= T::zero() {
        return T::zero();
    }
    spectral_density(bath, omega) * (bath.s / omega - T::one() / bath.omega_c)
}

/// C(t) = 2λ²ω_c^{1−s}Γ(s+1)(1/ω_c + it)^{−(s+1)}, for t ≥ 0.
///
/// Negative times follow from C(−t) = C(t)*; the closed form is analytic in t
/// so this function evaluates it for any real t.
pub fn correlation<T: Real>(bath: &BathSpec<T>, t: T) -> Complex<T> {
    let base = Complex::new(T::one() / bath.omega_c, t);
    base.powf(-(bath.s + T::one())) * bath.correlation_prefactor()
}

/// c_s = 4Γ(s+1)cos(πs/2)/(1−s), for 0 ≤ s < 1.
pub fn c_factor<T: Real>(s: T) -> Result<T> {
    if !(s >= T::zero() && s < T::one()) {
        return Err(invalid("s", format!("c_s needs 0 ≤ s < 1, got {s}")));
    }
    Ok(T::lit(4.0) * gamma(s + T::one()) * (T::PI() * s / T::lit(2.0)).cos() / (T::one() - s))
}

/// lim_{s→1⁻} c_s = 2π.
pub fn c_factor_limit<T: Real>() -> T {
    T::lit(2.0) * T::PI()
}

fn shift_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-12,
        rel: 1e-13,
        max_evals: 1_000_000,
    }
}

/// Closed form S(0) = −2λ²Γ(s)ω_c.
pub fn lamb_shift_at_zero(bath: &BathSpec<f64>) -> f64 {
    -2.0 * bath.lambda2 * gamma(bath.s) * bath.omega_c
}

/// S(ω) by quadrature. For ω > 0 the symmetric form
/// (1/π)∫₀^∞ [J(ω−y) − J(ω+y)]/y dy removes the pole.
pub fn lamb_shift(bath: &BathSpec<f64>, omega: f64) -> Result<f64> {
    let tol = shift_tolerance();
    let power = 1.0 / bath.s;
    let j = |x: f64| spectral_density(bath, x);
    if omega <= 0.0 {
        let v = integrate_half_line(|x| j(x) / (x - omega), bath.omega_c, power, tol)?;
        return Ok(-v / PI);
    }
    // [0, ω] under y = ω(1 − v^q): kink of J(ω − y) at y = ω
    let mut near_f = |v: f64| {
        // x = ω − y taken directly: forming ω − y loses x entirely once v^q < ε
        let x = omega * v.powf(power);
        let y = omega - x;
        let jac = omega * power * v.powf(power - 1.0);
        if y <= 0.0 {
            return 0.0;
        }
        (j(x) - j(omega + y)) / y * jac
    };
    let near = integrate_points(&mut near_f, &[0.0, 0.5, 1.0], tol)?;
    let far = integrate_half_line(|x| -j(2.0 * omega + x) / (omega + x), bath.omega_c, 1.0, tol)?;
    Ok((near + far) / PI)
}

/// S′(ω) = dS/dω. Diverges at ω = 0 for s ≤ 1.
pub fn lamb_shift_derivative(bath: &BathSpec<f64>, omega: f64) -> Result<f64> {
    let tol = shift_tolerance();
    let power = 1.0 / bath.s;
    if omega == 0.0 {
        return Err(invalid("omega", "S′(0) diverges for s ≤ 1"));
    }
    if omega < 0.0 {
        let v = integrate_half_line(|x| spectral_density(bath, x) / ((x - omega) * (x - omega)), bath.omega_c, power, tol)?;
        return Ok(-v / PI);
    }
    let jp = |x: f64| spectral_density_derivative(bath, x);
    // y = ω(1 − v^q): (ω − y)^{s−1} singularity at y = ω absorbed by q = 1/s
    let mut near_f = |v: f64| {
        let x = omega * v.powf(power);
        let y = omega - x;
        let jac = omega * power * v.powf(power - 1.0);
        if y <= 0.0 {
            return 0.0;
        }
        (jp(x) - jp(omega + y)) / y * jac
    };
    let near = integrate_points(&mut near_f, &[0.0, 0.5, 1.0], tol)?;
    let far = integrate_half_line(|x| -jp(2.0 * omega + x) / (omega + x), bath.omega_c, 1.0, tol)?;
    Ok((near + far) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> BathSpec<f64> {
        BathSpec::new(0.05875, 0.72, 10.0).unwrap()
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(BathSpec::new(-0.1, 0.5, 10.0).is_err());
        assert!(BathSpec::new(0.1, 1.2, 10.0).is_err());
        assert!(BathSpec::new(0.1, 0.0, 10.0).is_err());
        assert!(BathSpec::new(0.1, 0.5, 0.0).is_err());
        assert!(BathSpec::new(0.1, 1.0, 10.0).is_ok());
    }

    #[test]
    fn spectral_density_values() {
        let b = fig1();
        assert_eq!(spectral_density(&b, -2.0), 0.0);
        assert_eq!(spectral_density(&b, 0.0), 0.0);
        let want = 2.0 * PI * 0.05875 * 10f64.powf(0.28) * (-0.1f64).exp();
        assert!((spectral_density(&b, 1.0) - want).abs() < 1e-15);
        assert!((spectral_density(&b, 1.0) - 0.6365).abs() < 1e-4);
    }

    #[test]
    fn correlation_at_zero() {
        let b = fig1();
        let c0 = correlation(&b, 0.0);
        let want = 2.0 * 0.05875 * gamma(1.72) * 100.0;
        assert!((c0.re - want).abs() < 1e-12 && c0.im.abs() < 1e-14);
        assert!((c0.re - 10.72).abs() < 0.01);
    }

    #[test]
    fn correlation_is_linear_in_coupling() {
        let b = fig1();
        let b2 = b.with_lambda2(2.0 * b.lambda2()).unwrap();
        for &t in &[0.0, 0.3, 7.0, 1e3] {
            let r = correlation(&b2, t) / correlation(&b, t);
            assert!((r.re - 2.0).abs() < 1e-14 && r.im.abs() < 1e-14);
        }
    }

    #[test]
    fn c_factor_values() {
        assert!((c_factor(0.0f64).unwrap() - 4.0).abs() < 1e-15);
        let want = 8.0 * gamma(1.5) * (PI / 4.0).cos();
        assert!((c_factor(0.5).unwrap() - want).abs() < 1e-13);
        assert!((c_factor(0.5f64).unwrap() - 5.013).abs() < 1e-3);
        assert!((c_factor(1.0 - 1e-7).unwrap() - c_factor_limit::<f64>()).abs() < 1e-5);
        assert!(c_factor(1.0).is_err());
    }

    #[test]
    fn shift_at_zero_matches_closed_form() {
        for &s in &[0.1, 0.5, 0.72, 0.9] {
            let b = BathSpec::new(0.05875, s, 10.0).unwrap();
            let q = lamb_shift(&b, 0.0).unwrap();
            let c = lamb_shift_at_zero(&b);
            assert!(((q - c) / c).abs() < 1e-8, "s = {s}: {q} vs {c}");
        }
        assert!((lamb_shift_at_zero(&fig1()) + 1.490).abs() < 1e-3);
    }

    #[test]
    fn shift_and_derivative_signs() {
        let b = fig1();
        assert!(lamb_shift(&b, -1.0).unwrap() < 0.0);
        assert!(lamb_shift_derivative(&b, -1.0).unwrap() < 0.0);
        assert!(lamb_shift(&b, 0.0).unwrap() - lamb_shift(&b, -1.0).unwrap() < 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = fig1();
        for &w in &[-1.0, -0.3, 0.7, 1.0, 2.5] {
            let h = 1e-4;
            let fd = (lamb_shift(&b, w + h).unwrap() - lamb_shift(&b, w - h).unwrap()) / (2.0 * h);
            let d = lamb_shift_derivative(&b, w).unwrap();
            assert!(((fd - d) / d).abs() < 1e-6, "ω = {w}: {fd} vs {d}");
        }
    }

    #[test]
    fn shift_linear_in_coupling() {
        let b = fig1();
        let b3 = b.with_lambda2(3.0 * b.lambda2()).unwrap();
        for &w in &[-1.0, 1.0] {
            let r = lamb_shift(&b3, w).unwrap() / lamb_shift(&b, w).unwrap();
            assert!((r - 3.0).abs() < 1e-12);
        }
    }
}
