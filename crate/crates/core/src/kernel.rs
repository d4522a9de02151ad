//! One-dimensional bath kernels at unit coupling and their memoised table.
//!
//! Every kernel integral is split into a constant and a smooth amplitude times
//! a pure phase:
//!
//! ∫₀ᵗ C(v) e^{iνv} dv = M∞(ν) − e^{iνt} τ(ν, t),
//!
//! with τ(ν, t) = e^{−iνt}∫ₜ^∞ C(v)e^{iνv}dv non-oscillatory. Tails are
//! integrated panel by panel: directly while the phase is slow, then closed
//! with the polynomial particular solution of ψ′ + iνψ = C once the panel
//! holds several periods.

use crate::bath::BathSpec;
use crate::chebyshev;
use crate::cumulant::Flag;
use crate::error::{invalid, Result};
use num_complex::Complex64;

/// Scaled phase κ = νw/2 from which a panel is closed analytically; the
/// particular-solution recursion amplifies coefficient noise like Π 2j/κ.
pub(crate) const LEVIN_KAPPA: f64 = 24.0;
/// Largest scaled phase a degree-24 interpolant resolves to rounding.
pub(crate) const DIRECT_KAPPA: f64 = 4.0;

/// Panel breakpoints 0, h, 2h, … growing geometrically.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGrid {
    breaks: Vec<f64>,
}

impl PanelGrid {
    /// Widths are max(first, (ratio − 1)·left edge).
    pub fn geometric(first: f64, ratio: f64, t_max: f64) -> Result<Self> {
        if !(first > 0.0) || !(ratio > 1.0) || !(t_max > 0.0) {
            return Err(invalid("grid", format!("need first > 0, ratio > 1, t_max > 0 (got {first}, {ratio}, {t_max})")));
        }
        let mut breaks = vec![0.0];
        let mut p = 0.0;
        while p < t_max {
            p += first.max((ratio - 1.0) * p);
            breaks.push(p);
        }
        Ok(Self { breaks })
    }

    /// Arbitrary breakpoints; must start at 0 and increase strictly.
    pub fn from_breaks(breaks: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || breaks[0] != 0.0 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid", "breakpoints must start at 0 and increase strictly"));
        }
        Ok(Self { breaks })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }
    pub fn t_max(&self) -> f64 {
        *self.breaks.last().unwrap()
    }
    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }
    pub fn panel(&self, j: usize) -> (f64, f64) {
        (self.breaks[j], self.breaks[j + 1])
    }

    /// Panel containing t (right-closed at the last panel).
    pub fn locate(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0) || t > self.t_max() {
            return None;
        }
        let j = self.breaks.partition_point(|&b| b <= t);
        Some(j.saturating_sub(1).min(self.panels() - 1))
    }

    /// Reference coordinate of t inside panel j.
    pub fn local(&self, j: usize, t: f64) -> f64 {
        let (a, b) = self.panel(j);
        ((2.0 * t - a - b) / (b - a)).clamp(-1.0, 1.0)
    }
}

fn direct_panel(amp: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64, nu: f64) -> Complex64 {
    let prod: Vec<Complex64> = chebyshev::panel_nodes(a, b)
        .iter()
        .map(|&t| amp(t) * Complex64::from_polar(1.0, nu * t))
        .collect();
    chebyshev::integral(&chebyshev::coefficients(&prod)) * (0.5 * (b - a))
}

/// ∫ₐᵇ amp(v)e^{iνv} dv with amp resolved by one panel on [a, b].
pub fn oscillatory_panel(mut amp: impl FnMut(f64) -> Complex64, a: f64, b: f64, nu: f64) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let h = 0.5 * (b - a);
    let kappa = nu * h;
    if kappa.abs() >= LEVIN_KAPPA {
        let values: Vec<Complex64> = chebyshev::panel_nodes(a, b).iter().map(|&t| amp(t) * h).collect();
        let psi = chebyshev::oscillatory_particular(&chebyshev::coefficients(&values), kappa);
        return chebyshev::evaluate(&psi, 1.0) * Complex64::from_polar(1.0, nu * b) - chebyshev::evaluate(&psi, -1.0) * Complex64::from_polar(1.0, nu * a);
    }
    let pieces = (kappa.abs() / DIRECT_KAPPA).ceil().max(1.0) as usize;
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + k as f64 * w;
            let hi = if k + 1 == pieces { b } else { lo + w };
            direct_panel(&mut amp, lo, hi, nu)
        })
        .sum()
}

/// ∫ₜ^∞ amp(v)e^{iνv} dv for ν ≠ 0 and a smooth amplitude that decays (or
/// grows slower than linearly); `scale` is the width of its structure near 0.
pub fn oscillatory_tail(mut amp: impl FnMut(f64) -> Complex64, t: f64, nu: f64, scale: f64) -> Complex64 {
    debug_assert!(nu != 0.0);
    let switch = 2.0 * LEVIN_KAPPA / nu.abs();
    let mut total = Complex64::new(0.0, 0.0);
    let mut p = t;
    while p < switch {
        let w = p.max(scale).min(switch - p);
        total += oscillatory_panel(&mut amp, p, p + w, nu);
        p += w;
    }
    // the non-oscillatory particular solution on [p, 2p] carries the rest
    let h = 0.5 * p;
    let values: Vec<Complex64> = chebyshev::panel_nodes(p, 2.0 * p).iter().map(|&v| amp(v) * h).collect();
    let psi = chebyshev::oscillatory_particular(&chebyshev::coefficients(&values), nu * h);
    total - chebyshev::evaluate(&psi, -1.0) * Complex64::from_polar(1.0, nu * p)
}

/// Piecewise-Chebyshev memo of τ(±Δ, t) for the direct correlation function.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: PanelGrid,
    delta: f64,
    // [m = −1, m = +1] → per panel coefficients
    tails: [Vec<Vec<Complex64>>; 2],
}

/// Unit-coupling kernels of one bath shape (s, ω_c) and splitting Δ.
#[derive(Debug, Clone)]
pub struct Kernels {
    bath: BathSpec<f64>,
    delta: f64,
    prefactor: f64,
    table: Option<KernelTable>,
}

impl Kernels {
    /// Kernels without a table; tails are computed on demand.
    pub fn new(bath: &BathSpec<f64>, delta: f64) -> Result<Self> {
        if !bath.is_sub_ohmic() {
            return Err(invalid("s", "TCL kernels require a sub-Ohmic bath (s < 1)"));
        }
        let unit = bath.with_lambda2(1.0)?;
        Ok(Self {
            prefactor: unit.correlation_prefactor(),
            bath: unit,
            delta,
            table: None,
        })
    }

    /// Tabulate τ(±Δ, t) on `grid`.
    pub fn with_table(mut self, grid: PanelGrid) -> Self {
        let mut tails = [Vec::new(), Vec::new()];
        for (slot, m) in tails.iter_mut().zip([-1i8, 1]) {
            for j in 0..grid.panels() {
                let (a, b) = grid.panel(j);
                let values: Vec<Complex64> = chebyshev::panel_nodes(a, b).iter().map(|&t| self.tail_direct(m, t)).collect();
                slot.push(chebyshev::coefficients(&values));
            }
        }
        self.table = Some(KernelTable {
            grid,
            delta: self.delta,
            tails,
        });
        self
    }

    pub fn table(&self) -> Option<&KernelTable> {
        self.table.as_ref()
    }

    pub fn bath(&self) -> &BathSpec<f64> {
        &self.bath
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// 1/ω_c, the width of C(t) around t = 0.
    pub fn memory_scale(&self) -> f64 {
        1.0 / self.bath.omega_c()
    }

    /// C(t) (or C(t)*) at unit coupling.
    #[inline]
    pub fn corr(&self, flag: Flag, t: f64) -> Complex64 {
        let z = Complex64::new(self.memory_scale(), t).powf(-(self.bath.s() + 1.0)) * self.prefactor;
        match flag {
            Flag::Direct => z,
            Flag::Conjugate => z.conj(),
        }
    }

    fn tail_zero(&self, t: f64) -> Complex64 {
        // ∫ₜ^∞ (a + iv)^{−(s+1)} dv = (a + it)^{−s}/(is)
        let s = self.bath.s();
        Complex64::new(self.memory_scale(), t).powf(-s) / Complex64::new(0.0, s) * self.prefactor
    }

    fn tail_direct(&self, m: i8, t: f64) -> Complex64 {
        if m == 0 {
            return self.tail_zero(t);
        }
        let nu = m as f64 * self.delta;
        let integral = oscillatory_tail(|v| self.corr(Flag::Direct, v), t, nu, 0.5 * self.memory_scale());
        integral * Complex64::from_polar(1.0, -nu * t)
    }

    /// τ(f, mΔ, t) = e^{−imΔt}∫ₜ^∞ c_f(v)e^{imΔv}dv.
    pub fn tail(&self, flag: Flag, m: i8, t: f64) -> Complex64 {
        match flag {
            Flag::Direct => self.tail_direct_cached(m, t),
            Flag::Conjugate => self.tail_direct_cached(-m, t).conj(),
        }
    }

    fn tail_direct_cached(&self, m: i8, t: f64) -> Complex64 {
        if m == 0 {
            return self.tail_zero(t);
        }
        if let Some(tab) = &self.table {
            if let Some(j) = tab.grid.locate(t) {
                let slot = if m < 0 { 0 } else { 1 };
                return chebyshev::evaluate(&tab.tails[slot][j], tab.grid.local(j, t));
            }
        }
        self.tail_direct(m, t)
    }

    /// M∞(f, mΔ) = ∫₀^∞ c_f(v)e^{imΔv}dv.
    pub fn full_integral(&self, flag: Flag, m: i8) -> Complex64 {
        self.tail(flag, m, 0.0)
    }

    /// M₀(f, mΔ, t) = ∫₀ᵗ c_f(v)e^{imΔv}dv.
    pub fn partial_integral(&self, flag: Flag, m: i8, t: f64) -> Complex64 {
        self.full_integral(flag, m) - Complex64::from_polar(1.0, m as f64 * self.delta * t) * self.tail(flag, m, t)
    }

    /// τ₁(f, mΔ, t) = e^{−imΔt}∫ₜ^∞ (v − t)c_f(v)e^{imΔv}dv, m ≠ 0.
    pub fn first_moment_tail(&self, flag: Flag, m: i8, t: f64) -> Complex64 {
        assert!(m != 0, "first-moment tail diverges without a phase");
        let (mm, conj) = match flag {
            Flag::Direct => (m, false),
            Flag::Conjugate => (-m, true),
        };
        let nu = mm as f64 * self.delta;
        let integral = oscillatory_tail(|v| self.corr(Flag::Direct, v) * (v - t), t, nu, 0.5 * self.memory_scale());
        let z = integral * Complex64::from_polar(1.0, -nu * t);
        if conj {
            z.conj()
        } else {
            z
        }
    }

    /// ∫₀^∞ v c_f(v)e^{imΔv}dv, m ≠ 0.
    pub fn first_moment(&self, flag: Flag, m: i8) -> Complex64 {
        self.first_moment_tail(flag, m, 0.0)
    }

    /// ∫₀ᵗ (t − v) c_f(v) dv in closed form; grows as t and t^{1−s}.
    pub fn ramp(&self, flag: Flag, t: f64) -> Complex64 {
        let s = self.bath.s();
        let a = self.memory_scale();
        let w = Complex64::new(a, t);
        let z = w.powf(1.0 - s) / (s * (1.0 - s)) - w * a.powf(-s) / s - a.powf(1.0 - s) / (1.0 - s);
        // ∫₀ᵗ(t−v)(a+iv)^{−(s+1)}dv = −∫_a^W (W−w)w^{−s−1}dw with w = a + iv
        let z = z * self.prefactor;
        match flag {
            Flag::Direct => z,
            Flag::Conjugate => z.conj(),
        }
    }
}

impl KernelTable {
    pub fn grid(&self) -> &PanelGrid {
        &self.grid
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
}
