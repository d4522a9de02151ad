//! Structural properties of the TCL generators on random inputs.

use iqi_core::generator::{Affine, Averaging, ChannelTable, Order, UnitGenerators};
use iqi_core::superop::Super;
use iqi_core::{Bath, Qubit};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

const T_MAX: f64 = 300.0;

fn fig1_generators() -> &'static UnitGenerators {
    static GENS: OnceLock<UnitGenerators> = OnceLock::new();
    GENS.get_or_init(|| {
        let bath = Bath::new(1.0, 0.72, 10.0).unwrap();
        let q = Qubit::new(1.0, PI / 16.0).unwrap();
        UnitGenerators::build(&bath, &q, Order::Tcl4, T_MAX).unwrap()
    })
}

fn coupled(lambda2: f64) -> ChannelTable<Super> {
    fig1_generators().at_coupling(lambda2, Order::Tcl4).unwrap()
}

/// Hermitian 2×2 operator in the (11, 12, 21, 22) ordering.
fn hermitian(a: f64, d: f64, re: f64, im: f64) -> [Complex64; 4] {
    let z = Complex64::new(re, im);
    [Complex64::new(a, 0.0), z, z.conj(), Complex64::new(d, 0.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_annihilated_and_hermiticity_kept(
        t in 0.0f64..T_MAX,
        lambda2 in 1e-4f64..0.1,
        a in -2.0f64..2.0, d in -2.0f64..2.0, re in -2.0f64..2.0, im in -2.0f64..2.0,
    ) {
        let k = coupled(lambda2).eval(t).unwrap();
        let x = hermitian(a, d, re, im);
        let y = k.apply(&x);
        let scale = k.max_abs() * x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!((y[0] + y[3]).norm() <= 1e-10 * scale.max(1e-300));
        prop_assert!((y[1] - y[2].conj()).norm() <= 1e-10 * scale.max(1e-300));
        prop_assert!(y[0].im.abs() <= 1e-10 * scale && y[3].im.abs() <= 1e-10 * scale);
    }

    #[test]
    fn coupling_enters_as_lambda2_and_lambda4(t in 0.0f64..T_MAX, lambda2 in 1e-4f64..0.2) {
        let g = fig1_generators();
        let k4 = g.tcl4.as_ref().unwrap();
        let k = coupled(lambda2);
        let j = k.grid().locate(t).unwrap();
        let (p, p2, p4) = (&k.panels()[j], &g.tcl2.panels()[j], &k4.panels()[j]);
        // the stored series are exactly λ²·K₂ + λ⁴·K₄, term by term
        let n = p2.base.len().max(p4.base.len());
        prop_assert_eq!(p.base.len(), n);
        for (i, c) in p.base.iter().enumerate() {
            let term = |s: &[Super]| s.get(i).copied().unwrap_or_default();
            prop_assert_eq!(*c, term(&p2.base) * lambda2 + term(&p4.base) * (lambda2 * lambda2));
        }
        // evaluated values agree up to the rounding of the series sums
        let norm = |pan: &iqi_core::generator::TablePanel<Super>| {
            pan.base.iter().chain(pan.harmonics.iter().flat_map(|h| h.1.iter())).map(Super::max_abs).sum::<f64>()
        };
        let scale = norm(p2) * lambda2 + norm(p4) * lambda2 * lambda2;
        let want = g.tcl2.eval(t).unwrap() * lambda2 + k4.eval(t).unwrap() * (lambda2 * lambda2);
        prop_assert!((k.eval(t).unwrap() - want).max_abs() <= 1e-14 * scale);
        let second = g.at_coupling(lambda2, Order::Tcl2).unwrap().eval(t).unwrap();
        prop_assert_eq!(second, g.tcl2.scaled(lambda2).eval(t).unwrap());
    }
}

/// Secular ρ₂₂ → ρ₁₂ coupling of K₄; grows like t^{1−s} at late times.
fn growth_slope(s: f64) -> f64 {
    let bath = Bath::new(1.0, s, 10.0).unwrap();
    let q = Qubit::new(1.0, PI / 16.0).unwrap();
    let gens = UnitGenerators::build(&bath, &q, Order::Tcl4, 2e5).unwrap();
    let k4 = gens.tcl4.unwrap().map(Affine::from_super);
    let coef = |t: f64| k4.averaged(t, Averaging::Secular).unwrap().0[4].norm();
    (coef(1.6e5) / coef(4e4)).ln() / 4f64.ln()
}

#[test]
fn fourth_order_growth_follows_power_law() {
    for s in [0.1, 0.5, 0.72] {
        let k = growth_slope(s);
        assert!((k - (1.0 - s)).abs() <= 0.05, "s={s}: slope {k}");
    }
}
