//! TCL2 and TCL4 generators at unit coupling, tabulated on panels.
//!
//! A generator is stored as K(t) = G₀(t) + Σₙ e^{inΔt} Gₙ(t), n = ±1, ±2, ±3,
//! with every Gₙ a Chebyshev series per panel. On short panels where the
//! phases are resolved by the polynomial the harmonics are folded into G₀;
//! such panels are marked as not separated.
//!
//! TCL4 is built from its time derivative: with u₃ = t the triple integral
//! collapses to one-dimensional kernels (tails τ, first moments, a closed-form
//! ramp) plus two convolution integrals for the crossed pairing. The
//! derivative is then integrated panel by panel, harmonics kept apart.

use crate::bath::BathSpec;
use crate::chebyshev::{self, ComplexLinear, NODES};
use crate::cumulant::{tcl2_terms, tcl4_terms, Flag, Pairing, Tcl4Key};
use crate::error::{invalid, Error, Result};
use crate::kernel::{oscillatory_panel, Kernels, PanelGrid, DIRECT_KAPPA, LEVIN_KAPPA};
use crate::quadrature::{gauss_legendre, QuadValue};
use crate::qubit::QubitSpec;
use crate::superop::Super;
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

/// Highest harmonic of Δ appearing in K₄.
pub const MAX_HARMONIC: i8 = 3;
const CHANNELS: usize = 2 * MAX_HARMONIC as usize + 1;

/// Perturbative order of the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Tcl2,
    Tcl4,
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2" | "tcl2" => Ok(Order::Tcl2),
            "4" | "tcl4" => Ok(Order::Tcl4),
            _ => Err(invalid("order", format!("expected tcl2 or tcl4, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Order::Tcl2 => "tcl2",
            Order::Tcl4 => "tcl4",
        })
    }
}

/// How the oscillating harmonics are removed from K(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Keep only G₀; falls back to the running mean on unseparated panels.
    Secular,
    /// Mean of K over one period 2π/Δ centred on t.
    RunningMean,
}

/// Breakpoints for generator tables: geometric growth, capped in width until
/// every harmonic can be closed analytically.
pub fn generator_grid(bath: &BathSpec<f64>, delta: f64, t_max: f64) -> Result<PanelGrid> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(invalid("t_end", format!("must be positive and finite, got {t_max}")));
    }
    let first = 0.5 / bath.omega_c();
    let cap = 2.0 * DIRECT_KAPPA / (MAX_HARMONIC as f64 * delta);
    let mut breaks = vec![0.0];
    let mut p: f64 = 0.0;
    while p < t_max {
        let mut w = first.max(0.4 * p);
        if 0.5 * delta * w < LEVIN_KAPPA {
            w = w.min(cap);
        }
        p += w;
        breaks.push(p);
    }
    PanelGrid::from_breaks(breaks)
}

fn gl48() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(48))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TablePanel<V> {
    pub base: Vec<V>,
    pub harmonics: Vec<(i8, Vec<V>)>,
    /// `base` carries no e^{inΔt} content.
    pub separated: bool,
}

/// Piecewise representation K(t) = G₀ + Σ e^{inΔt}Gₙ.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable<V> {
    grid: PanelGrid,
    delta: f64,
    panels: Vec<TablePanel<V>>,
}

impl<V: ComplexLinear> ChannelTable<V> {
    pub fn from_parts(grid: PanelGrid, delta: f64, panels: Vec<TablePanel<V>>) -> Result<Self> {
        if panels.len() != grid.panels() || panels.iter().any(|p| p.base.len() != NODES || p.harmonics.iter().any(|h| h.1.len() != NODES)) {
            return Err(invalid("table", "panel data does not match the grid"));
        }
        Ok(Self { grid, delta, panels })
    }

    pub fn grid(&self) -> &PanelGrid {
        &self.grid
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn t_max(&self) -> f64 {
        self.grid.t_max()
    }
    pub fn panels(&self) -> &[TablePanel<V>] {
        &self.panels
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let j = self.grid.locate(t).ok_or(Error::OutOfTable { t, t_max: self.t_max() })?;
        Ok((j, self.grid.local(j, t)))
    }

    /// K(t).
    pub fn eval(&self, t: f64) -> Result<V> {
        let (j, x) = self.locate(t)?;
        let p = &self.panels[j];
        let mut v = chebyshev::evaluate(&p.base, x);
        for (n, c) in &p.harmonics {
            v = v + chebyshev::evaluate(c, x) * Complex64::from_polar(1.0, *n as f64 * self.delta * t);
        }
        Ok(v)
    }

    /// Harmonic n of K at t; n = 0 is G₀. Only meaningful on separated panels.
    pub fn harmonic(&self, n: i8, t: f64) -> Result<V> {
        let (j, x) = self.locate(t)?;
        let p = &self.panels[j];
        if n == 0 {
            return Ok(chebyshev::evaluate(&p.base, x));
        }
        Ok(p.harmonics.iter().find(|h| h.0 == n).map(|h| chebyshev::evaluate(&h.1, x)).unwrap_or_default())
    }

    pub fn is_separated(&self, t: f64) -> Result<bool> {
        Ok(self.panels[self.locate(t)?.0].separated)
    }

    /// K with its oscillating content removed.
    pub fn averaged(&self, t: f64, mode: Averaging) -> Result<V> {
        if mode == Averaging::Secular {
            let (j, x) = self.locate(t)?;
            if self.panels[j].separated {
                return Ok(chebyshev::evaluate(&self.panels[j].base, x));
            }
        }
        self.running_mean(t)
    }

    /// (Δ/2π)∫K over one period around t, shifted to stay inside the table.
    pub fn running_mean(&self, t: f64) -> Result<V> {
        let period = 2.0 * PI / self.delta;
        if period > self.t_max() {
            return Err(Error::OutOfTable {
                t: t + 0.5 * period,
                t_max: self.t_max(),
            });
        }
        let lo = (t - 0.5 * period).clamp(0.0, self.t_max() - period);
        let (x, w) = gl48();
        let mut acc = V::default();
        for (xi, wi) in x.iter().zip(w) {
            acc = acc + self.eval(lo + 0.5 * period * (xi + 1.0))? * (0.5 * wi);
        }
        Ok(acc)
    }

    /// Apply `f` coefficient-wise (f must be linear).
    pub fn map<W: ComplexLinear>(&self, f: impl Fn(&V) -> W) -> ChannelTable<W> {
        let conv = |c: &Vec<V>| c.iter().map(&f).collect::<Vec<W>>();
        ChannelTable {
            grid: self.grid.clone(),
            delta: self.delta,
            panels: self
                .panels
                .iter()
                .map(|p| TablePanel {
                    base: conv(&p.base),
                    harmonics: p.harmonics.iter().map(|(n, c)| (*n, conv(c))).collect(),
                    separated: p.separated,
                })
                .collect(),
        }
    }

    /// a·self + b·other on a shared grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid || self.delta != other.delta {
            return Err(invalid("table", "cannot combine tables on different grids"));
        }
        // series may differ in length (antiderivatives carry one extra term)
        let lin = |x: &[V], y: &[V]| {
            let get = |c: &[V], i: usize| c.get(i).copied().unwrap_or_default();
            (0..x.len().max(y.len())).map(|i| get(x, i) * a + get(y, i) * b).collect::<Vec<V>>()
        };
        let panels = self
            .panels
            .iter()
            .zip(&other.panels)
            .map(|(p, q)| {
                let mut harmonics = Vec::new();
                for n in (-MAX_HARMONIC..=MAX_HARMONIC).filter(|&n| n != 0) {
                    let find = |t: &TablePanel<V>| t.harmonics.iter().find(|h| h.0 == n).map(|h| h.1.clone());
                    match (find(p), find(q)) {
                        (Some(x), Some(y)) => harmonics.push((n, lin(&x, &y))),
                        (Some(x), None) => harmonics.push((n, x.iter().map(|u| *u * a).collect())),
                        (None, Some(y)) => harmonics.push((n, y.iter().map(|v| *v * b).collect())),
                        (None, None) => {}
                    }
                }
                TablePanel {
                    base: lin(&p.base, &q.base),
                    harmonics,
                    separated: p.separated && q.separated,
                }
            })
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            delta: self.delta,
            panels,
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| *v * a)
    }
}

/// TCL2 generator at unit coupling, sampled directly.
pub fn tcl2_table(kernels: &Kernels, qubit: &QubitSpec<f64>, grid: &PanelGrid) -> ChannelTable<Super> {
    let terms = tcl2_terms(qubit);
    let full: Vec<Complex64> = terms.iter().map(|(k, _)| kernels.full_integral(k.flag, k.m)).collect();
    let panels = (0..grid.panels())
        .map(|j| {
            let (a, b) = grid.panel(j);
            let nodes = chebyshev::panel_nodes(a, b);
            let mut base = vec![Super::zero(); NODES];
            let mut osc: HashMap<i8, Vec<Super>> = HashMap::new();
            for ((key, s), m_inf) in terms.iter().zip(&full) {
                for (k, &t) in nodes.iter().enumerate() {
                    let tail = kernels.tail(key.flag, key.m, t);
                    if key.m == 0 {
                        base[k] = base[k] + *s * (m_inf - tail);
                    } else {
                        base[k] = base[k] + *s * *m_inf;
                        let e = osc.entry(key.m).or_insert_with(|| vec![Super::zero(); NODES]);
                        e[k] = e[k] - *s * tail;
                    }
                }
            }
            let mut harmonics: Vec<(i8, Vec<Super>)> = osc.into_iter().map(|(n, v)| (n, chebyshev::coefficients(&v))).collect();
            harmonics.sort_by_key(|h| h.0);
            TablePanel {
                base: chebyshev::coefficients(&base),
                harmonics,
                separated: true,
            }
        })
        .collect();
    ChannelTable {
        grid: grid.clone(),
        delta: kernels.delta(),
        panels,
    }
}

/// Smooth partition weight: 1 below 1/3, 0 above 2/3, χ(x) + χ(1 − x) = 1.
fn partition(x: f64) -> f64 {
    if x <= 1.0 / 3.0 {
        return 1.0;
    }
    if x >= 2.0 / 3.0 {
        return 0.0;
    }
    let y = 3.0 * x - 1.0;
    let y4 = y * y * y * y;
    1.0 - y4 * (35.0 - 84.0 * y + 70.0 * y * y - 20.0 * y * y * y)
}

/// Operator data and constants for the TCL4 rate.
struct Tcl4Rate<'a> {
    kernels: &'a Kernels,
    terms: Vec<(Tcl4Key, Super)>,
    full: HashMap<(Flag, i8), Complex64>,
    moment: HashMap<(Flag, i8), Complex64>,
}

type CrossKey = (Flag, Flag, i8, i8);

impl<'a> Tcl4Rate<'a> {
    fn new(kernels: &'a Kernels, qubit: &QubitSpec<f64>) -> Self {
        let terms: Vec<(Tcl4Key, Super)> = tcl4_terms(qubit).into_iter().filter(|(k, _)| k.pairing != Pairing::Adjacent).collect();
        let mut full = HashMap::new();
        let mut moment = HashMap::new();
        for f in [Flag::Direct, Flag::Conjugate] {
            for m in -2..=2i8 {
                full.insert((f, m), kernels.full_integral(f, m));
                if m != 0 {
                    moment.insert((f, m), kernels.first_moment(f, m));
                }
            }
        }
        Self { kernels, terms, full, moment }
    }

    /// ∫₀^{2t/3} χ(u/t) c_outer(u) τ_inner(t − u) e^{iκΔu} du and its mirror.
    fn crossed(&self, (outer, inner, m1, kap): CrossKey, t: f64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        if t <= 0.0 {
            return (zero, zero);
        }
        let k = self.kernels;
        let nu = kap as f64 * k.delta();
        let mut breaks = vec![0.0];
        let mut p = 0.5 * k.memory_scale();
        while p < t / 3.0 {
            breaks.push(p);
            p *= 2.0;
        }
        breaks.extend([t / 3.0, 0.5 * t, 2.0 * t / 3.0]);
        let mut ra = zero;
        let mut rb = zero;
        for w in breaks.windows(2) {
            ra += oscillatory_panel(|u| k.corr(outer, u) * k.tail(inner, -m1, t - u) * partition(u / t), w[0], w[1], nu);
            rb += oscillatory_panel(|v| k.corr(outer, t - v) * k.tail(inner, -m1, v) * partition(v / t), w[0], w[1], -nu);
        }
        (ra, rb)
    }

    /// dK₄/dt split into harmonics n = −3..3 (index n + 3).
    fn channels(&self, t: f64) -> [Super; CHANNELS] {
        let k = self.kernels;
        let delta = k.delta();
        let mut ch = [Super::zero(); CHANNELS];
        let mut add = |n: i8, v: Super| {
            let i = (n + MAX_HARMONIC) as usize;
            ch[i] = ch[i] + v;
        };
        let mut cross: HashMap<CrossKey, (Complex64, Complex64)> = HashMap::new();
        for (key, s) in &self.terms {
            let [m1, m2, m3] = key.m;
            match key.pairing {
                Pairing::Nested => {
                    let c3 = k.corr(key.outer, t);
                    let f = key.inner;
                    let alpha = m1 + m2;
                    if alpha == 0 && m2 == 0 {
                        add(m3, *s * (c3 * k.ramp(f, t)));
                    } else if alpha == 0 {
                        add(m3, *s * (c3 * (self.full[&(f, m2)] * t - self.moment[&(f, m2)])));
                        add(m3 + m2, *s * (c3 * k.first_moment_tail(f, m2, t)));
                    } else {
                        let inv = Complex64::new(0.0, -1.0 / (alpha as f64 * delta));
                        add(m3 + alpha, *s * (c3 * self.full[&(f, -m1)] * inv));
                        add(m3 + m2, *s * (c3 * (k.tail(f, m2, t) - k.tail(f, -m1, t)) * inv));
                        add(m3, *s * (-c3 * self.full[&(f, m2)] * inv));
                    }
                }
                Pairing::Crossed => {
                    let kap = m1 + m2;
                    let ck = (key.outer, key.inner, m1, kap);
                    let (ra, rb) = *cross.entry(ck).or_insert_with(|| self.crossed(ck, t));
                    let tn = k.tail(key.inner, -m1, t);
                    add(m3, *s * (ra - tn * self.full[&(key.outer, m2)]));
                    add(m3 + kap, *s * rb);
                    add(m3 + m2, *s * (tn * k.tail(key.outer, m2, t)));
                }
                Pairing::Adjacent => {}
            }
        }
        ch
    }
}

/// dK₄/dt at t as harmonics n = −3..3; exposed for checks against brute force.
pub fn tcl4_rate(kernels: &Kernels, qubit: &QubitSpec<f64>, t: f64) -> Vec<(i8, Super)> {
    let rate = Tcl4Rate::new(kernels, qubit);
    rate.channels(t).iter().enumerate().map(|(i, s)| (i as i8 - MAX_HARMONIC, *s)).collect()
}

fn check_grid(grid: &PanelGrid, delta: f64) -> Result<()> {
    for j in 0..grid.panels() {
        let (a, b) = grid.panel(j);
        let k1 = 0.5 * delta * (b - a);
        let k3 = MAX_HARMONIC as f64 * k1;
        if k3 > DIRECT_KAPPA * (1.0 + 1e-12) && k1 < LEVIN_KAPPA {
            return Err(invalid("grid", format!("panel [{a}, {b}] is neither resolved nor closable for all harmonics")));
        }
    }
    Ok(())
}

/// TCL4 generator at unit coupling by panelwise integration of its rate.
/// The kernels should carry a table covering the grid.
pub fn tcl4_table(kernels: &Kernels, qubit: &QubitSpec<f64>, grid: &PanelGrid) -> Result<ChannelTable<Super>> {
    check_grid(grid, kernels.delta())?;
    let rate = Tcl4Rate::new(kernels, qubit);
    let delta = kernels.delta();
    let mut left = Super::zero();
    let mut panels = Vec::with_capacity(grid.panels());
    for j in 0..grid.panels() {
        let (a, b) = grid.panel(j);
        let h = 0.5 * (b - a);
        let nodes = chebyshev::panel_nodes(a, b);
        let values: Vec<[Super; CHANNELS]> = nodes.iter().map(|&t| rate.channels(t)).collect();
        let mut direct = vec![Super::zero(); NODES];
        let mut harmonics = Vec::new();
        let mut separated = true;
        let mut offset = left;
        let mut right_osc = Super::zero();
        for (i, n) in (-MAX_HARMONIC..=MAX_HARMONIC).enumerate() {
            let column: Vec<Super> = values.iter().map(|v| v[i]).collect();
            if column.iter().all(|s| s.max_abs() == 0.0) {
                continue;
            }
            let nu = n as f64 * delta;
            if n != 0 && (nu * h).abs() >= LEVIN_KAPPA {
                let scaled: Vec<Super> = column.iter().map(|s| *s * h).collect();
                let psi = chebyshev::oscillatory_particular(&chebyshev::coefficients(&scaled), nu * h);
                offset = offset - chebyshev::evaluate(&psi, -1.0) * Complex64::from_polar(1.0, nu * a);
                right_osc = right_osc + chebyshev::evaluate(&psi, 1.0) * Complex64::from_polar(1.0, nu * b);
                harmonics.push((n, psi));
            } else {
                if n != 0 {
                    separated = false;
                }
                for ((d, c), &t) in direct.iter_mut().zip(&column).zip(&nodes) {
                    *d = *d + *c * Complex64::from_polar(1.0, nu * t);
                }
            }
        }
        let mut base: Vec<Super> = chebyshev::antiderivative(&chebyshev::coefficients(&direct))
            .into_iter()
            .map(|c| c * h)
            .collect();
        base[0] = base[0] + offset;
        left = chebyshev::evaluate(&base, 1.0) + right_osc;
        panels.push(TablePanel { base, harmonics, separated });
    }
    Ok(ChannelTable {
        grid: grid.clone(),
        delta,
        panels,
    })
}

/// Unit-coupling generators of one (s, ω_c, θ, Δ), reusable for every λ².
#[derive(Debug, Clone, PartialEq)]
pub struct UnitGenerators {
    pub tcl2: ChannelTable<Super>,
    pub tcl4: Option<ChannelTable<Super>>,
}

impl UnitGenerators {
    pub fn build(bath: &BathSpec<f64>, qubit: &QubitSpec<f64>, order: Order, t_max: f64) -> Result<Self> {
        let grid = generator_grid(bath, qubit.delta(), t_max)?;
        let kernel_grid = PanelGrid::geometric(0.5 / bath.omega_c(), 1.4, grid.t_max())?;
        let kernels = Kernels::new(bath, qubit.delta())?.with_table(kernel_grid);
        let tcl2 = tcl2_table(&kernels, qubit, &grid);
        let tcl4 = match order {
            Order::Tcl2 => None,
            Order::Tcl4 => Some(tcl4_table(&kernels, qubit, &grid)?),
        };
        Ok(Self { tcl2, tcl4 })
    }

    pub fn order(&self) -> Order {
        if self.tcl4.is_some() {
            Order::Tcl4
        } else {
            Order::Tcl2
        }
    }

    pub fn t_max(&self) -> f64 {
        self.tcl2.t_max()
    }

    /// λ²K₂ + λ⁴K₄ truncated at `order`.
    pub fn at_coupling(&self, lambda2: f64, order: Order) -> Result<ChannelTable<Super>> {
        match (order, &self.tcl4) {
            (Order::Tcl2, _) => Ok(self.tcl2.scaled(lambda2)),
            (Order::Tcl4, Some(k4)) => self.tcl2.combine(lambda2, k4, lambda2 * lambda2),
            (Order::Tcl4, None) => Err(invalid("order", "TCL4 requested from TCL2-only tables")),
        }
    }
}

/// Real-form generator rows: d(ρ₂₂, Re ρ₁₂, Im ρ₁₂)/dt from (ρ₂₂, Re ρ₁₂, Im ρ₁₂, 1).
///
/// Entries 0..4 are the ρ₂₂ row, 4..8 the ρ₁₂ row; the derivative is the real
/// part of the first row and the real and imaginary parts of the second.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Affine(pub [Complex64; 8]);

impl Affine {
    pub fn from_super(k: &Super) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let mut out = [Complex64::new(0.0, 0.0); 8];
        for (slot, row) in [(0usize, 3usize), (4, 1)] {
            let r = &k.0[row];
            out[slot] = r[3] - r[0];
            out[slot + 1] = r[1] + r[2];
            out[slot + 2] = i * (r[1] - r[2]);
            out[slot + 3] = r[0];
        }
        Affine(out)
    }

    #[inline]
    pub fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        let a = &self.0;
        let row = |o: usize| a[o] * x[0] + a[o + 1] * x[1] + a[o + 2] * x[2] + a[o + 3];
        let r22 = row(0);
        let r12 = row(4);
        [r22.re, r12.re, r12.im]
    }
}

impl Add for Affine {
    type Output = Affine;
    fn add(mut self, rhs: Affine) -> Affine {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Affine {
    type Output = Affine;
    fn sub(mut self, rhs: Affine) -> Affine {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul<f64> for Affine {
    type Output = Affine;
    fn mul(mut self, rhs: f64) -> Affine {
        self.0.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl Mul<Complex64> for Affine {
    type Output = Affine;
    fn mul(mut self, rhs: Complex64) -> Affine {
        self.0.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl QuadValue for Affine {
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::fgr_rate;

    fn setup(s: f64, theta: f64) -> (BathSpec<f64>, QubitSpec<f64>) {
        (BathSpec::new(1.0, s, 10.0).unwrap(), QubitSpec::new_unchecked(1.0, theta))
    }

    fn rho(r22: f64, z: Complex64) -> [Complex64; 4] {
        [Complex64::new(1.0 - r22, 0.0), z, z.conj(), Complex64::new(r22, 0.0)]
    }

    #[test]
    fn partition_is_symmetric_and_smooth() {
        for &x in &[0.0, 0.2, 0.4, 0.45, 0.5, 0.61, 0.9] {
            assert!((partition(x) + partition(1.0 - x) - 1.0).abs() < 1e-14);
        }
        let d = 1e-6;
        let slope = (partition(1.0 / 3.0 + d) - partition(1.0 / 3.0)) / d;
        assert!(slope.abs() < 1e-10);
    }

    #[test]
    fn grid_keeps_harmonics_resolvable() {
        let (bath, q) = setup(0.5, 0.3);
        let g = generator_grid(&bath, q.delta(), 2e6).unwrap();
        check_grid(&g, 1.0).unwrap();
        assert!(g.panels() < 200);
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let (bath, q) = setup(0.72, PI / 16.0);
        let gens = UnitGenerators::build(&bath, &q, Order::Tcl4, 300.0).unwrap();
        let k = gens.at_coupling(0.05875, Order::Tcl4).unwrap();
        for &t in &[0.01, 0.7, 9.0, 150.0, 299.0] {
            let kt = k.eval(t).unwrap();
            for x in [rho(0.3, Complex64::new(0.2, -0.1)), rho(1.0, Complex64::new(0.0, 0.0))] {
                let y = kt.apply(&x);
                assert!((y[0] + y[3]).norm() < 1e-12, "trace at t={t}");
                assert!((y[1] - y[2].conj()).norm() < 1e-12, "hermiticity at t={t}");
                assert!(y[0].im.abs() < 1e-12 && y[3].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coupling_homogeneity() {
        let (bath, q) = setup(0.5, 0.4);
        let gens = UnitGenerators::build(&bath, &q, Order::Tcl4, 50.0).unwrap();
        let t = 17.3;
        let k4 = gens.tcl4.as_ref().unwrap().eval(t).unwrap();
        let k2 = gens.tcl2.eval(t).unwrap();
        for l in [0.01, 0.2] {
            let k = gens.at_coupling(l, Order::Tcl4).unwrap().eval(t).unwrap();
            let want = k2 * l + k4 * (l * l);
            assert!((k - want).max_abs() < 1e-13 * want.max_abs().max(1.0));
        }
    }

    #[test]
    fn tcl2_markov_limit_matches_golden_rule() {
        // averaged K₂ at late times → Redfield rates; ρ₂₂ decays at 2J(Δ)|A₁₂|²
        let (bath, q) = setup(0.5, PI / 16.0);
        let gens = UnitGenerators::build(&bath, &q, Order::Tcl2, 5e5).unwrap();
        let lambda2 = 0.01;
        let k = gens.at_coupling(lambda2, Order::Tcl2).unwrap().map(Affine::from_super);
        let a = k.averaged(4e5, Averaging::Secular).unwrap();
        let slope = a.apply(&[1.0, 0.0, 0.0])[0] - a.apply(&[0.0, 0.0, 0.0])[0];
        let want = -fgr_rate(&q, &bath.with_lambda2(lambda2).unwrap()).nu1;
        assert!((slope - want).abs() < 2e-3 * want.abs(), "{slope} vs {want}");
    }

    #[test]
    fn pure_dephasing_has_no_fourth_order() {
        // A ∝ σ_z commutes with H_S: the second-order cumulant is exact
        let (bath, q) = setup(0.5, PI / 2.0);
        let gens = UnitGenerators::build(&bath, &q, Order::Tcl4, 40.0).unwrap();
        let k4 = gens.tcl4.as_ref().unwrap();
        let k2 = &gens.tcl2;
        for &t in &[0.2, 3.0, 39.0] {
            assert!(k4.eval(t).unwrap().max_abs() < 1e-11 * k2.eval(t).unwrap().max_abs().max(1.0), "t={t}");
        }
    }

    /// Triple Gauss–Legendre over the simplex 0 ≤ u₁ ≤ u₂ ≤ u₃ ≤ t.
    fn brute_force_tcl4(kernels: &Kernels, q: &QubitSpec<f64>, t: f64, n: usize) -> Super {
        let terms = tcl4_terms(q);
        let (x, w) = gauss_legendre(n);
        let mut acc = Super::zero();
        let d = q.delta();
        for (x3, w3) in x.iter().zip(&w) {
            let u3 = 0.5 * t * (x3 + 1.0);
            let j3 = 0.5 * t * w3;
            for (x2, w2) in x.iter().zip(&w) {
                let u2 = 0.5 * u3 * (x2 + 1.0);
                let j2 = 0.5 * u3 * w2;
                for (x1, w1) in x.iter().zip(&w) {
                    let u1 = 0.5 * u2 * (x1 + 1.0);
                    let jac = j3 * j2 * 0.5 * u2 * w1;
                    for (key, s) in &terms {
                        let [m1, m2, m3] = key.m;
                        let (outer, inner) = match key.pairing {
                            Pairing::Adjacent => (kernels.corr(key.outer, u1), kernels.corr(key.inner, u3 - u2)),
                            Pairing::Crossed => (kernels.corr(key.outer, u2), kernels.corr(key.inner, u3 - u1)),
                            Pairing::Nested => (kernels.corr(key.outer, u3), kernels.corr(key.inner, u2 - u1)),
                        };
                        let ph = Complex64::from_polar(1.0, d * (m1 as f64 * u1 + m2 as f64 * u2 + m3 as f64 * u3));
                        acc = acc + *s * (outer * inner * ph * jac);
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn tcl4_matches_brute_force_simplex_integral() {
        let (bath, q) = setup(0.6, 0.5);
        let kernels = Kernels::new(&bath, 1.0).unwrap();
        let grid = PanelGrid::from_breaks(vec![0.0, 0.05, 0.1, 0.2, 0.35]).unwrap();
        let table = tcl4_table(&kernels, &q, &grid).unwrap();
        for &t in &[0.1, 0.35] {
            let want = brute_force_tcl4(&kernels, &q, t, 40);
            let got = table.eval(t).unwrap();
            assert!(
                (got - want).max_abs() < 1e-8 * want.max_abs(),
                "t={t}: {} vs {}",
                (got - want).max_abs(),
                want.max_abs()
            );
        }
    }

    #[test]
    fn tcl4_grows_as_power_of_time() {
        // the secular ρ₂₂ coupling of K₄ grows like t^{1−s}
        let s = 0.5;
        let (bath, q) = setup(s, PI / 16.0);
        let gens = UnitGenerators::build(&bath, &q, Order::Tcl4, 2e5).unwrap();
        let k4 = gens.tcl4.as_ref().unwrap().map(Affine::from_super);
        let coef = |t: f64| {
            let a = k4.averaged(t, Averaging::Secular).unwrap();
            a.0[4].norm()
        };
        let slope = (coef(1.6e5) / coef(4e4)).ln() / 4f64.ln();
        assert!((slope - (1.0 - s)).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn affine_form_matches_superoperator() {
        let mut k = Super::zero();
        for (i, row) in k.0.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = Complex64::new((i * 4 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.3);
            }
        }
        let x = [0.3, 0.1, -0.2];
        let r = rho(x[0], Complex64::new(x[1], x[2]));
        let y = k.apply(&r);
        let a = Affine::from_super(&k).apply(&x);
        assert!((a[0] - y[3].re).abs() < 1e-14);
        assert!((a[1] - y[1].re).abs() < 1e-14);
        assert!((a[2] - y[1].im).abs() < 1e-14);
    }
}
