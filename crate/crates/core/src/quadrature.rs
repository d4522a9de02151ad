//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre rules.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Values a quadrature rule can accumulate.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-12,
            max_evals: 1_000_000,
        }
    }
}

// G7-K15 abscissae (positive half, descending) and weights.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XK[j];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive G7K15 over `[a, b]`, bisecting the worst segment.
pub fn integrate<V: QuadValue>(mut f: impl FnMut(f64) -> V, a: f64, b: f64, tol: Tolerance) -> Result<V> {
    integrate_points(&mut f, &[a, b], tol)
}

/// As [`integrate`], with forced breakpoints (kinks, integrable singularities).
pub fn integrate_points<V: QuadValue>(f: &mut impl FnMut(f64) -> V, points: &[f64], tol: Tolerance) -> Result<V> {
    let mut heap = BinaryHeap::new();
    let mut total = V::default();
    let mut err = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(f, w[0], w[1]);
        evals += 15;
        total = total + v;
        err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    loop {
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(total);
        }
        if evals >= tol.max_evals {
            return Err(Error::QuadratureBudget {
                tolerance: target,
                evaluations: evals,
                estimate: err,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(total);
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // segment cannot be split further in floating point
            return Err(Error::QuadratureBudget {
                tolerance: target,
                evaluations: evals,
                estimate: err,
            });
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        evals += 30;
        total = total - worst.value + v1 + v2;
        err += e1 + e2 - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
}

/// ∫₀^∞ f(x) dx under `x = scale·(u/(1−u))^power`, u ∈ (0, 1).
///
/// `power > 1` clusters nodes near x = 0, which absorbs integrable x^(s−1)
/// endpoint behaviour when `power ≈ 1/s`.
pub fn integrate_half_line<V: QuadValue>(mut f: impl FnMut(f64) -> V, scale: f64, power: f64, tol: Tolerance) -> Result<V> {
    let mut g = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return V::default();
        }
        let r = u / (1.0 - u);
        let x = scale * r.powf(power);
        let jac = scale * power * r.powf(power - 1.0) / ((1.0 - u) * (1.0 - u));
        if !jac.is_finite() || !x.is_finite() {
            return V::default();
        }
        f(x) * jac
    };
    integrate_points(&mut g, &[0.0, 0.5, 1.0], tol)
}

/// ∫ₐᵇ f(x) dx under `x = a + (b−a)·v^power`, clustering nodes at `a`.
pub fn integrate_clustered<V: QuadValue>(mut f: impl FnMut(f64) -> V, a: f64, b: f64, power: f64, tol: Tolerance) -> Result<V> {
    let w = b - a;
    let mut g = |v: f64| f(a + w * v.powf(power)) * (w * power * v.powf(power - 1.0));
    integrate_points(&mut g, &[0.0, 1.0], tol)
}

/// n-point Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}
