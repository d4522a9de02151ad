//! Bath closed forms against independent quadrature.

mod oracle;

use iqi_core::bath::{correlation, lamb_shift, lamb_shift_at_zero, lamb_shift_derivative};
use iqi_core::Bath;

const BATHS: [(f64, f64, f64); 4] = [(0.05875, 0.72, 10.0), (4.25e-4, 0.1, 10.0), (0.01, 0.5, 10.0), (1.0, 0.3, 3.0)];

#[test]
fn correlation_matches_fourier_integral() {
    for (l2, s, wc) in BATHS {
        let bath = Bath::new(l2, s, wc).unwrap();
        for t in [0.0, 0.003, 0.05, 0.4, 1.0, 3.7, 10.0, 31.0, 64.0, 100.0] {
            let got = correlation(&bath, t);
            let [re, im] = oracle::correlation_fourier(l2, s, wc, t);
            let err = ((got.re - re).powi(2) + (got.im - im).powi(2)).sqrt();
            assert!(err <= 1e-8 * got.norm(), "s={s} t={t}: {got} vs {re}{im:+}i");
        }
    }
}

#[test]
fn correlation_is_hermitian_in_time() {
    let bath = Bath::new(0.2, 0.5, 10.0).unwrap();
    for t in [0.1, 2.0, 50.0] {
        let (a, b) = (correlation(&bath, t), correlation(&bath, -t));
        assert!((a - b.conj()).norm() < 1e-15 * a.norm());
    }
}

#[test]
fn shift_at_zero_matches_quadrature() {
    for (l2, s, wc) in BATHS {
        let bath = Bath::new(l2, s, wc).unwrap();
        let want = oracle::shift_pv(l2, s, wc, 0.0);
        let got = lamb_shift_at_zero(&bath);
        assert!((got - want).abs() <= 1e-8 * want.abs(), "s={s}: {got} vs {want}");
    }
}

#[test]
fn shift_matches_principal_value() {
    for (l2, s, wc) in BATHS {
        let bath = Bath::new(l2, s, wc).unwrap();
        for w in [-1.0, -0.3, 0.5, 1.0, 4.0] {
            let want = oracle::shift_pv(l2, s, wc, w);
            let got = lamb_shift(&bath, w).unwrap();
            assert!((got - want).abs() <= 1e-8 * want.abs(), "s={s} ω={w}: {got} vs {want}");
        }
    }
}

#[test]
fn shift_derivative_matches_finite_differences() {
    for (l2, s, wc) in BATHS {
        let bath = Bath::new(l2, s, wc).unwrap();
        for w in [-1.0, 1.0] {
            let want = oracle::shift_derivative_fd(l2, s, wc, w);
            let got = lamb_shift_derivative(&bath, w).unwrap_or_else(|e| panic!("s={s} ω={w}: {e}"));
            assert!((got - want).abs() <= 1e-6 * want.abs(), "s={s} ω={w}: {got} vs {want}");
        }
    }
}
