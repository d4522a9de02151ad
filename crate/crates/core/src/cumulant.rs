//! Operator algebra of the TCL2/TCL4 generators for a Gaussian bath.
//!
//! With u_k = t − t_k (0 = u₀ ≤ u₁ ≤ u₂ ≤ u₃ ≤ t) the Schrödinger-picture
//! generators read
//!
//! K₂(t) = ∫ du₁ ⟨L₀L₁⟩,
//! K₄(t) = ∫∫∫ ⟨L₀L₁L₂L₃⟩ − ⟨L₀L₁⟩⟨L₂L₃⟩ − ⟨L₀L₂⟩⟨L₁L₃⟩ − ⟨L₀L₃⟩⟨L₁L₂⟩,
//!
//! with L_k = −i[A(−u_k)B(t_k), ·]. Each L_k splits into a left and a right
//! multiplication; the bath factor of a product is the ordered expectation
//! ⟨(right factors, last applied first)(left factors)⟩, which Wick's theorem
//! reduces to products of C(x) or C(x)* with x = u_j − u_i ≥ 0. The
//! coupling A(−u) = Σ_m A_m e^{imΔu} has components m ∈ {−1, 0, 1}.
//!
//! This module enumerates all sign patterns and components and collects the
//! constant superoperator multiplying each scalar kernel integral.

use crate::qubit::QubitSpec;
use crate::superop::{mat2_mul, Mat2, Super, IDENTITY2, ZERO2};
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Whether a two-point factor is C(x) or its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    Direct,
    Conjugate,
}

/// Wick pairings of the four time arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pairing {
    /// (0,1)(2,3): C(u₁)·C(u₃ − u₂)
    Adjacent,
    /// (0,2)(1,3): C(u₂)·C(u₃ − u₁)
    Crossed,
    /// (0,3)(1,2): C(u₃)·C(u₂ − u₁)
    Nested,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::Adjacent, Pairing::Crossed, Pairing::Nested];

    /// (outer pair containing index 0, inner pair).
    pub fn pairs(self) -> [(usize, usize); 2] {
        match self {
            Pairing::Adjacent => [(0, 1), (2, 3)],
            Pairing::Crossed => [(0, 2), (1, 3)],
            Pairing::Nested => [(0, 3), (1, 2)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tcl2Key {
    pub flag: Flag,
    /// phase e^{i m Δ u₁}
    pub m: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tcl4Key {
    pub pairing: Pairing,
    pub outer: Flag,
    pub inner: Flag,
    /// phase e^{iΔ(m₁u₁ + m₂u₂ + m₃u₃)}
    pub m: [i8; 3],
}

/// A(−u) components; `m` labels the phase e^{imΔu}.
pub fn coupling_component(qubit: &QubitSpec<f64>, m: i8) -> Mat2 {
    let a = qubit.coupling_matrix();
    let mut out = ZERO2;
    match m {
        0 => {
            out[0][0] = a.a11.into();
            out[1][1] = a.a22.into();
        }
        1 => out[0][1] = a.a12.into(),
        -1 => out[1][0] = a.a21().into(),
        _ => unreachable!("coupling component {m}"),
    }
    out
}

/// Full A(−u) = e^{−iH_S u} A e^{iH_S u}.
pub fn coupling_at(qubit: &QubitSpec<f64>, u: f64) -> Mat2 {
    let mut out = ZERO2;
    for m in -1..=1i8 {
        let ph = Complex64::from_polar(1.0, m as f64 * qubit.delta() * u);
        let c = coupling_component(qubit, m);
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += c[i][j] * ph;
            }
        }
    }
    out
}

/// Superoperator of one sign pattern: `left[k]` selects left (true) or right
/// multiplication by `ops[k]`, applied in order k = n−1, …, 0.
pub fn string_superop(ops: &[Mat2], left: &[bool]) -> Super {
    let mut l = IDENTITY2;
    let mut r = IDENTITY2;
    for (op, &is_left) in ops.iter().zip(left) {
        if is_left {
            l = mat2_mul(&l, op);
        }
    }
    // right string: X A_{j_m} ⋯ A_{j_1}, larger index nearest X
    for (op, &is_left) in ops.iter().zip(left).rev() {
        if !is_left {
            r = mat2_mul(&r, op);
        }
    }
    Super::sandwich(&l, &r)
}

/// Position of each index in the ordered bath expectation.
pub fn bath_positions(left: &[bool]) -> Vec<usize> {
    let n = left.len();
    let mut order: Vec<usize> = (0..n).rev().filter(|&k| !left[k]).collect();
    order.extend((0..n).filter(|&k| left[k]));
    let mut pos = vec![0; n];
    for (p, &k) in order.iter().enumerate() {
        pos[k] = p;
    }
    pos
}

/// Flag of the pair (i, j), i < j, given expectation positions.
pub fn pair_flag(pos: &[usize], i: usize, j: usize) -> Flag {
    if pos[i] < pos[j] {
        Flag::Direct
    } else {
        Flag::Conjugate
    }
}

fn sign(left: &[bool]) -> f64 {
    left.iter().map(|&l| if l { 1.0 } else { -1.0 }).product()
}

fn patterns(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |bits| (0..n).map(|k| bits >> k & 1 == 1).collect())
}

fn components(n: usize) -> impl Iterator<Item = Vec<i8>> {
    (0..3usize.pow(n as u32)).map(move |mut code| {
        (0..n)
            .map(|_| {
                let m = (code % 3) as i8 - 1;
                code /= 3;
                m
            })
            .collect()
    })
}

const NEGLIGIBLE: f64 = 1e-15;

/// Constant superoperators of K₂ at unit coupling, keyed by kernel.
pub fn tcl2_terms(qubit: &QubitSpec<f64>) -> Vec<(Tcl2Key, Super)> {
    let mut acc: BTreeMap<Tcl2Key, Super> = BTreeMap::new();
    for left in patterns(2) {
        let pos = bath_positions(&left);
        let flag = pair_flag(&pos, 0, 1);
        // (−i)² = −1
        let pref = -sign(&left);
        for m in components(2) {
            let ops: Vec<Mat2> = m.iter().map(|&mk| coupling_component(qubit, mk)).collect();
            let s = string_superop(&ops, &left) * pref;
            let key = Tcl2Key { flag, m: m[1] };
            let e = acc.entry(key).or_default();
            *e = *e + s;
        }
    }
    acc.into_iter().filter(|(_, s)| s.max_abs() > NEGLIGIBLE).collect()
}

/// Constant superoperators of K₄ at unit coupling (four-point term minus the
/// three ordered products), keyed by kernel. Keys whose net superoperator
/// vanishes are dropped.
pub fn tcl4_terms(qubit: &QubitSpec<f64>) -> Vec<(Tcl4Key, Super)> {
    tcl4_terms_split(qubit)
        .into_iter()
        .map(|(k, full, sub)| (k, full - sub))
        .filter(|(_, s)| s.max_abs() > NEGLIGIBLE)
        .collect()
}

/// Four-point and subtracted parts separately (before cancellation).
pub fn tcl4_terms_split(qubit: &QubitSpec<f64>) -> Vec<(Tcl4Key, Super, Super)> {
    let mut full: BTreeMap<Tcl4Key, Super> = BTreeMap::new();
    let mut sub: BTreeMap<Tcl4Key, Super> = BTreeMap::new();
    let comps: Vec<Mat2> = (-1..=1).map(|m| coupling_component(qubit, m)).collect();
    let comp = |m: i8| comps[(m + 1) as usize];

    for left in patterns(4) {
        let pos = bath_positions(&left);
        // (−i)⁴ = 1
        let pref = sign(&left);
        for m in components(4) {
            let ops: Vec<Mat2> = m.iter().map(|&mk| comp(mk)).collect();
            let s = string_superop(&ops, &left) * pref;
            let phase = [m[1], m[2], m[3]];
            for pairing in Pairing::ALL {
                let [(a, b), (c, d)] = pairing.pairs();
                let key = Tcl4Key {
                    pairing,
                    outer: pair_flag(&pos, a, b),
                    inner: pair_flag(&pos, c, d),
                    m: phase,
                };
                let e = full.entry(key).or_default();
                *e = *e + s;
            }
            // ordered products ⟨L_a L_b⟩⟨L_c L_d⟩: the (c, d) factor acts first
            for pairing in Pairing::ALL {
                let [(a, b), (c, d)] = pairing.pairs();
                let outer_left = [left[a], left[b]];
                let inner_left = [left[c], left[d]];
                let outer = string_superop(&[ops[a], ops[b]], &outer_left) * (-sign(&outer_left));
                let inner = string_superop(&[ops[c], ops[d]], &inner_left) * (-sign(&inner_left));
                let key = Tcl4Key {
                    pairing,
                    outer: pair_flag(&bath_positions(&outer_left), 0, 1),
                    inner: pair_flag(&bath_positions(&inner_left), 0, 1),
                    m: phase,
                };
                let e = sub.entry(key).or_default();
                *e = *e + outer.compose(&inner);
            }
        }
    }
    for k in sub.keys() {
        full.entry(*k).or_default();
    }
    full.into_iter()
        .map(|(k, f)| {
            let s = sub.get(&k).copied().unwrap_or_default();
            (k, f, s)
        })
        .collect()
}
