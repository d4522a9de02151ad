//! Piecewise Chebyshev machinery on Lobatto nodes.
//!
//! Everything here works in the reference coordinate x ∈ [−1, 1]; callers
//! rescale derivatives and integrals by the panel half-width.

use crate::quadrature::QuadValue;
use num_complex::Complex64;
use std::ops::Mul;
use std::sync::OnceLock;

/// Polynomial degree used for all panels; `DEGREE + 1` Lobatto nodes.
pub const DEGREE: usize = 24;
pub const NODES: usize = DEGREE + 1;

/// Values that can also be scaled by a complex number.
pub trait ComplexLinear: QuadValue + Mul<Complex64, Output = Self> {}
impl<T: QuadValue + Mul<Complex64, Output = T>> ComplexLinear for T {}

struct Basis {
    nodes: [f64; NODES],
    // transform[j][k]: weight of f(x_k) in coefficient j
    transform: Vec<[f64; NODES]>,
}

fn basis() -> &'static Basis {
    static BASIS: OnceLock<Basis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let n = DEGREE as f64;
        let mut nodes = [0.0; NODES];
        for (k, x) in nodes.iter_mut().enumerate() {
            // ascending order: x_0 = −1, x_N = +1
            *x = -(std::f64::consts::PI * k as f64 / n).cos();
        }
        let mut transform = vec![[0.0; NODES]; NODES];
        for (j, row) in transform.iter_mut().enumerate() {
            for (k, w) in row.iter_mut().enumerate() {
                let mut v = 2.0 / n * (std::f64::consts::PI * (j * k) as f64 / n).cos();
                if k == 0 || k == DEGREE {
                    v *= 0.5;
                }
                if j == 0 || j == DEGREE {
                    v *= 0.5;
                }
                // nodes are stored reversed (x_k = −cos), so T_j(x_k) picks up (−1)^j
                if j % 2 == 1 {
                    v = -v;
                }
                *w = v;
            }
        }
        Basis { nodes, transform }
    })
}

/// Lobatto nodes in ascending order on [−1, 1].
pub fn nodes() -> &'static [f64; NODES] {
    &basis().nodes
}

/// Lobatto nodes mapped onto `[a, b]`, ascending.
pub fn panel_nodes(a: f64, b: f64) -> [f64; NODES] {
    let mut out = [0.0; NODES];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    for (o, x) in out.iter_mut().zip(nodes()) {
        *o = c + h * x;
    }
    out[0] = a;
    out[DEGREE] = b;
    out
}

/// Chebyshev coefficients from values at [`nodes`].
pub fn coefficients<V: QuadValue>(values: &[V]) -> Vec<V> {
    debug_assert_eq!(values.len(), NODES);
    basis()
        .transform
        .iter()
        .map(|row| row.iter().zip(values).fold(V::default(), |acc, (&w, &v)| acc + v * w))
        .collect()
}

/// Clenshaw evaluation at x ∈ [−1, 1].
pub fn evaluate<V: QuadValue>(coeffs: &[V], x: f64) -> V {
    let mut b1 = V::default();
    let mut b2 = V::default();
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + b1 * x - b2
}

/// Antiderivative in x, vanishing at x = −1.
pub fn antiderivative<V: QuadValue>(coeffs: &[V]) -> Vec<V> {
    let n = coeffs.len();
    let mut out = vec![V::default(); n + 1];
    let get = |k: usize| if k < n { coeffs[k] } else { V::default() };
    // ∫T_0 = T_1, ∫T_1 = T_2/4 (+const), ∫T_k = T_{k+1}/(2(k+1)) − T_{k−1}/(2(k−1))
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let c_prev = if k == 1 { get(0) * 2.0 } else { get(k - 1) };
        *slot = (c_prev - get(k + 1)) * (1.0 / (2.0 * k as f64));
    }
    // fix constant so the value at −1 vanishes: T_k(−1) = (−1)^k
    let mut at_minus_one = V::default();
    for (k, &c) in out.iter().enumerate().skip(1) {
        at_minus_one = if k % 2 == 0 { at_minus_one + c } else { at_minus_one - c };
    }
    out[0] = V::default() - at_minus_one;
    out
}

/// ∫_{−1}^{1} of the series.
pub fn integral<V: QuadValue>(coeffs: &[V]) -> V {
    coeffs
        .iter()
        .enumerate()
        .step_by(2)
        .fold(V::default(), |acc, (j, &c)| acc + c * (2.0 / (1.0 - (j * j) as f64)))
}

/// Polynomial particular solution of ψ′ + iκψ = h in the x coordinate.
///
/// The polynomial solution is unique for κ ≠ 0 and contains no e^{−iκx}
/// component, so ∫ h e^{iκx} dx = [ψ e^{iκx}] over any sub-interval.
/// Ill-conditioned when |κ| is small compared with the degree; callers fall
/// back to direct integration of the product below a threshold.
pub fn oscillatory_particular<V: ComplexLinear>(h: &[V], kappa: f64) -> Vec<V> {
    let n = h.len() - 1;
    let inv = Complex64::new(0.0, -1.0 / kappa);
    let mut psi = vec![V::default(); n + 1];
    // d_k: Chebyshev coefficients of ψ′ (d_0 stored doubled)
    let mut d = vec![V::default(); n + 3];
    for k in (0..=n).rev() {
        if k < n {
            d[k] = d[k + 2] + psi[k + 1] * (2.0 * (k + 1) as f64);
        }
        let dk = if k == 0 { d[0] * 0.5 } else { d[k] };
        psi[k] = (h[k] - dk) * inv;
    }
    psi
}
