//! Independent numerical references for the bath closed forms: plain
//! composite Gauss–Legendre with geometric grading at the ω = 0 branch point.
//! Nothing here calls the library's own quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// ∫ f over [a, b] split into panels of at most `width`, with the first panel
/// refined geometrically towards `a` (for an algebraic singularity there).
pub fn integrate<F: FnMut(f64) -> [f64; 2]>(mut f: F, a: f64, b: f64, width: f64) -> [f64; 2] {
    let gl = gauss_legendre(24);
    let mut acc = [0.0; 2];
    let mut panel = |lo: f64, hi: f64, acc: &mut [f64; 2]| {
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for &(x, w) in &gl {
            let v = f(m + h * x);
            acc[0] += w * h * v[0];
            acc[1] += w * h * v[1];
        }
    };
    let first = (a + width).min(b);
    let mut hi = first;
    for _ in 0..80 {
        let lo = a + 0.5 * (hi - a);
        panel(lo, hi, &mut acc);
        hi = lo;
    }
    let n = ((b - first) / width).ceil() as usize;
    for i in 0..n {
        let lo = first + (b - first) * i as f64 / n as f64;
        let hi = first + (b - first) * (i + 1) as f64 / n as f64;
        panel(lo, hi, &mut acc);
    }
    acc
}

/// J(ω) = 2πλ²ω_c^{1−s}ω^s e^{−ω/ω_c}, written out independently.
pub fn spectral(lambda2: f64, s: f64, wc: f64, w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        2.0 * PI * lambda2 * wc.powf(1.0 - s) * w.powf(s) * (-w / wc).exp()
    }
}

/// C(t) = (1/π)∫₀^∞ J(ω) e^{−iωt} dω as (re, im).
pub fn correlation_fourier(lambda2: f64, s: f64, wc: f64, t: f64) -> [f64; 2] {
    let width = (0.5 / (1.0 + t.abs())).min(0.05 * wc);
    integrate(
        |w| {
            let j = spectral(lambda2, s, wc, w) / PI;
            [j * (w * t).cos(), -j * (w * t).sin()]
        },
        0.0,
        90.0 * wc,
        width,
    )
}

/// S(ω) = (1/π) P∫₀^∞ J(x)/(ω − x) dx, singularity subtracted on [0, 2ω].
pub fn shift_pv(lambda2: f64, s: f64, wc: f64, omega: f64) -> f64 {
    let j = |x: f64| spectral(lambda2, s, wc, x);
    let top = 90.0 * wc;
    if omega <= 0.0 {
        // y = x^s turns the x^{s−1} endpoint singularity into a smooth integrand
        let c = 2.0 * PI * lambda2 * wc.powf(1.0 - s) / s;
        let v = integrate(
            |y| {
                let x = y.powf(1.0 / s);
                [c * x * (-x / wc).exp() / (omega - x), 0.0]
            },
            0.0,
            top.powf(s),
            0.02 * wc.powf(s),
        );
        return v[0] / PI;
    }
    let jw = j(omega);
    // the subtracted term integrates to zero on the symmetric interval
    let near = integrate(|x| [(j(x) - jw) / (omega - x), 0.0], 0.0, 2.0 * omega, 0.05 * omega);
    let far = integrate(|x| [j(x) / (omega - x), 0.0], 2.0 * omega, top, 0.05 * wc);
    (near[0] + far[0]) / PI
}

/// Central-difference derivative of the reference shift, one Richardson step.
pub fn shift_derivative_fd(lambda2: f64, s: f64, wc: f64, omega: f64) -> f64 {
    let d = |h: f64| (shift_pv(lambda2, s, wc, omega + h) - shift_pv(lambda2, s, wc, omega - h)) / (2.0 * h);
    let h = 1e-2 * omega.abs();
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}
