//! Time integration of dρ/dt = −i[H_S, ρ] + K(t)ρ.
//!
//! The state is the real triple (ρ₂₂, Re ρ₁₂, Im ρ₁₂), so trace and
//! Hermiticity hold by construction. Integration is Dormand–Prince 5(4) with
//! its fourth-order continuous extension for output between steps.

use crate::bath::BathSpec;
use crate::cache::{self, CacheStatus};
use crate::error::{invalid, Error, Result};
use crate::generator::{Affine, Averaging, ChannelTable, Order, UnitGenerators};
use crate::qubit::{QubitSpec, QubitState};
use std::f64::consts::PI;
use std::path::Path;

/// How the generator enters the equation of motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    Averaged(Averaging),
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Averaged(Averaging::Secular) => "averaged-secular",
            Mode::Averaged(Averaging::RunningMean) => "averaged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u64,
    /// Integration ends early once max(|ρ₂₂ − ½|, |ρ₁₂|) exceeds this; a
    /// physical state stays within ½. Far past T_IQ the perturbative
    /// generator drives the state out without bound.
    pub escape: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000_000,
            escape: 1.0,
        }
    }
}

impl Tolerances {
    pub fn halved(&self) -> Self {
        Self {
            rtol: 0.5 * self.rtol,
            atol: 0.5 * self.atol,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
    pub h_min: f64,
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub order: Option<Order>,
    pub mode: String,
    pub tolerances: Tolerances,
    pub stats: StepStats,
    /// Samples whose smaller eigenvalue is below −1e−9.
    pub positivity_violations: usize,
    /// Time beyond which the state was frozen (cutoff mode).
    pub cutoff: Option<f64>,
    /// Time at which the state left the escape bound and integration stopped.
    pub escaped_at: Option<f64>,
}

/// Samples (t, ρ(t)) at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, QubitState)>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(samples: Vec<(f64, QubitState)>, meta: TrajectoryMeta) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invalid("trajectory", "sample times must increase strictly"));
        }
        Ok(Self { samples, meta })
    }

    /// Bare trajectory with placeholder metadata (synthetic data, parsed CSV).
    pub fn from_samples(samples: Vec<(f64, QubitState)>) -> Result<Self> {
        Self::new(
            samples,
            TrajectoryMeta {
                order: None,
                mode: "external".into(),
                tolerances: Tolerances::default(),
                stats: StepStats::default(),
                positivity_violations: 0,
                cutoff: None,
                escaped_at: None,
            },
        )
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples with t in [lo, hi].
    pub fn window(&self, lo: f64, hi: f64) -> &[(f64, QubitState)] {
        let a = self.samples.partition_point(|s| s.0 < lo);
        let b = self.samples.partition_point(|s| s.0 <= hi);
        &self.samples[a..b]
    }

    /// Freeze ρ to the diagonal of its value at `t_cut` for all later samples.
    pub fn with_cutoff(&self, t_cut: f64) -> Self {
        let mut out = self.clone();
        let frozen = out
            .samples
            .iter()
            .take_while(|s| s.0 <= t_cut)
            .last()
            .map(|s| QubitState::new(s.1.rho22, 0.0, 0.0));
        if let Some(f) = frozen {
            for s in out.samples.iter_mut().filter(|s| s.0 > t_cut) {
                s.1 = f;
            }
        }
        out.meta.cutoff = Some(t_cut);
        out
    }
}

/// Equation of motion for one (qubit, coupling, order, mode).
#[derive(Debug, Clone)]
pub struct Propagator {
    delta: f64,
    generator: Option<ChannelTable<Affine>>,
    mode: Mode,
    order: Option<Order>,
    tol: Tolerances,
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type V3 = [f64; 3];

#[inline]
fn comb(y: &V3, terms: &[(f64, &V3)]) -> V3 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += c * k[i];
        }
    }
    out
}

fn positivity_ok(s: &QubitState) -> bool {
    s.eigenvalues()[0] >= -1e-9
}

impl Propagator {
    /// Free evolution (λ² = 0).
    pub fn free(delta: f64, tol: Tolerances) -> Self {
        Self {
            delta,
            generator: None,
            mode: Mode::Full,
            order: None,
            tol,
        }
    }

    pub fn new(gens: &UnitGenerators, delta: f64, lambda2: f64, order: Order, mode: Mode, tol: Tolerances) -> Result<Self> {
        if lambda2 == 0.0 {
            return Ok(Self {
                order: Some(order),
                mode,
                ..Self::free(delta, tol)
            });
        }
        let table = gens.at_coupling(lambda2, order)?.map(Affine::from_super);
        Ok(Self {
            delta,
            generator: Some(table),
            mode,
            order: Some(order),
            tol,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.generator.as_ref().map_or(f64::INFINITY, |g| g.t_max())
    }

    /// d(ρ₂₂, Re ρ₁₂, Im ρ₁₂)/dt.
    pub fn rhs(&self, t: f64, x: &V3) -> Result<V3> {
        // −i[H_S, ρ] with H_S = −Δσ_z/2 rotates ρ₁₂ as e^{iΔt}
        let mut d = [0.0, -self.delta * x[2], self.delta * x[1]];
        if let Some(g) = &self.generator {
            let k = match self.mode {
                Mode::Full => g.eval(t)?,
                Mode::Averaged(a) => g.averaged(t, a)?,
            };
            let y = k.apply(x);
            for i in 0..3 {
                d[i] += y[i];
            }
        }
        Ok(d)
    }

    /// Integrate from ρ(t₀) and report ρ at each requested time (all ≥ t₀).
    pub fn run(&self, t0: f64, x0: QubitState, times: &[f64]) -> Result<Trajectory> {
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.first().is_some_and(|&t| t < t0) {
            return Err(invalid("sampling", "output times must increase strictly and start at or after t0"));
        }
        let t_end = times.last().copied().unwrap_or(t0);
        if t_end > self.t_max() {
            return Err(Error::OutOfTable { t: t_end, t_max: self.t_max() });
        }
        let tol = self.tol;
        let mut stats = StepStats {
            h_min: f64::INFINITY,
            ..Default::default()
        };
        let mut samples = Vec::with_capacity(times.len());
        let mut next = 0;
        let mut t = t0;
        let mut y = x0.as_array();
        while next < times.len() && times[next] == t0 {
            samples.push((t0, x0));
            next += 1;
        }
        let mut k1 = self.rhs(t, &y)?;
        stats.rhs_evals += 1;
        let mut h = self.initial_step(t, &y, &k1, t_end)?;
        stats.rhs_evals += 1;
        let mut last_err: f64 = 1e-4;
        let mut escaped_at = None;
        while next < times.len() {
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(Error::StepUnderflow { t, h });
            }
            h = h.min(t_end - t);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
            let k2 = self.rhs(t + C2 * h, &comb(&y, &[(h * A21, &k1)]))?;
            let k3 = self.rhs(t + C3 * h, &comb(&y, &[(h * A31, &k1), (h * A32, &k2)]))?;
            let k4 = self.rhs(t + C4 * h, &comb(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]))?;
            let k5 = self.rhs(t + C5 * h, &comb(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]))?;
            let k6 = self.rhs(
                t + h,
                &comb(&y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
            )?;
            let y1 = comb(&y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
            let t1 = if t_end - (t + h) < 1e-13 * t_end.abs().max(1.0) { t_end } else { t + h };
            let k7 = self.rhs(t1, &y1)?;
            stats.rhs_evals += 6;
            let mut err = 0.0;
            for i in 0..3 {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / 3.0).sqrt();
            if err <= 1.0 {
                // continuous extension on [t, t1]
                let ydiff: V3 = std::array::from_fn(|i| y1[i] - y[i]);
                let bspl: V3 = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                let r4: V3 = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
                let r5: V3 = std::array::from_fn(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
                while next < times.len() && times[next] <= t1 {
                    let th = if t1 == times[next] { 1.0 } else { (times[next] - t) / h };
                    let th1 = 1.0 - th;
                    let v: V3 = std::array::from_fn(|i| y[i] + th * (ydiff[i] + th1 * (bspl[i] + th * (r4[i] + th1 * r5[i]))));
                    samples.push((times[next], QubitState::from_array(v)));
                    next += 1;
                }
                stats.accepted += 1;
                stats.h_min = stats.h_min.min(h);
                stats.h_max = stats.h_max.max(h);
                t = t1;
                y = y1;
                k1 = k7;
                if (y[0] - 0.5).abs().max(y[1].hypot(y[2])) > tol.escape {
                    escaped_at = Some(t);
                    break;
                }
                // PI step control
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * last_err.powf(0.4 / 5.0);
                h *= fac.clamp(0.2, 5.0);
                last_err = err.max(1e-4);
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        let violations = samples.iter().filter(|s| !positivity_ok(&s.1)).count();
        Trajectory::new(
            samples,
            TrajectoryMeta {
                order: self.order,
                mode: self.mode.label().into(),
                tolerances: tol,
                stats,
                positivity_violations: violations,
                cutoff: None,
                escaped_at,
            },
        )
    }

    fn initial_step(&self, t: f64, y: &V3, f0: &V3, t_end: f64) -> Result<f64> {
        let sc: V3 = std::array::from_fn(|i| self.tol.atol + self.tol.rtol * y[i].abs());
        let norm = |v: &V3| ((0..3).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / 3.0).sqrt();
        let d0 = norm(y);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(t_end - t).max(1e-12);
        let y1 = comb(y, &[(h0, f0)]);
        let f1 = self.rhs(t + h0, &y1)?;
        let d2: V3 = std::array::from_fn(|i| (f1[i] - f0[i]) / h0);
        let d2 = norm(&d2);
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1))
    }
}

/// How output times are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// 0, dt, 2dt, …, t_end.
    Uniform {
        dt: f64,
    },
    Times(Vec<f64>),
}

impl Sampling {
    pub fn times(&self, t_end: f64) -> Result<Vec<f64>> {
        match self {
            Sampling::Uniform { dt } => {
                if !(*dt > 0.0) {
                    return Err(invalid("dt", "must be positive"));
                }
                let n = (t_end / dt).round() as usize;
                let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * dt).filter(|&t| t < t_end).collect();
                v.push(t_end);
                Ok(v)
            }
            Sampling::Times(v) => Ok(v.clone()),
        }
    }
}

/// Everything needed to build a propagator for a run.
#[derive(Debug, Clone)]
pub struct RunSpec<'a> {
    pub qubit: QubitSpec<f64>,
    pub bath: BathSpec<f64>,
    pub order: Order,
    pub mode: Mode,
    pub tol: Tolerances,
    pub cache_dir: Option<&'a Path>,
}

impl RunSpec<'_> {
    /// Build (or load) tables covering [0, t_end] and the propagator.
    pub fn propagator(&self, t_end: f64) -> Result<(Propagator, CacheStatus)> {
        let delta = self.qubit.delta();
        if self.bath.lambda2() == 0.0 {
            return Ok((
                Propagator::new(&dummy_tables(), delta, 0.0, self.order, self.mode, self.tol)?,
                CacheStatus::Disabled,
            ));
        }
        // the running mean looks half a period ahead
        let span = t_end + 2.0 * PI / delta;
        let (gens, status) = cache::load_or_build(&self.bath, &self.qubit, self.order, span, self.cache_dir)?;
        Ok((Propagator::new(&gens, delta, self.bath.lambda2(), self.order, self.mode, self.tol)?, status))
    }
}

fn dummy_tables() -> UnitGenerators {
    // never evaluated: λ² = 0 short-circuits in Propagator::new
    UnitGenerators {
        tcl2: ChannelTable::from_parts(
            crate::kernel::PanelGrid::from_breaks(vec![0.0, 1.0]).unwrap(),
            1.0,
            vec![crate::generator::TablePanel {
                base: vec![Default::default(); crate::chebyshev::NODES],
                harmonics: vec![],
                separated: true,
            }],
        )
        .unwrap(),
        tcl4: None,
    }
}

/// Propagate from the excited state to t_end.
pub fn propagate(spec: &RunSpec, t_end: f64, sampling: &Sampling) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(invalid("t_end", format!("must be positive, got {t_end}")));
    }
    let (p, _) = spec.propagator(t_end)?;
    p.run(0.0, QubitState::excited(), &sampling.times(t_end)?)
}

/// Output plan of a long run: a geometric grid of coarse-graining windows
/// plus dense full-oscillation windows once per decade.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRunPlan {
    pub ratio: f64,
    pub first: f64,
    pub samples_per_period: usize,
    pub periods_per_decade_window: usize,
    pub dense_until: f64,
}

impl Default for LongRunPlan {
    fn default() -> Self {
        Self {
            ratio: 1.1,
            first: 10.0,
            samples_per_period: 32,
            periods_per_decade_window: 20,
            dense_until: 100.0,
        }
    }
}

impl LongRunPlan {
    /// Centres of the coarse-graining windows.
    pub fn centres(&self, delta: f64, t_end: f64) -> Vec<f64> {
        let half = PI / delta;
        let mut out = Vec::new();
        let mut t = self.first.max(half);
        while t + half <= t_end {
            out.push(t);
            t *= self.ratio;
        }
        out
    }

    pub fn times(&self, delta: f64, t_end: f64) -> Vec<f64> {
        let period = 2.0 * PI / delta;
        let dt = period / self.samples_per_period as f64;
        let mut v: Vec<f64> = Vec::new();
        // fully resolved early dynamics
        let n0 = (self.dense_until.min(t_end) / dt).floor() as usize;
        v.extend((0..=n0).map(|k| k as f64 * dt));
        for c in self.centres(delta, t_end) {
            v.extend((0..=self.samples_per_period).map(|k| c - 0.5 * period + k as f64 * dt));
        }
        let mut decade = 100.0;
        while decade < t_end {
            let len = self.periods_per_decade_window as f64 * period;
            let start = decade.min(t_end - len).max(0.0);
            let n = self.periods_per_decade_window * self.samples_per_period;
            v.extend((0..=n).map(|k| start + k as f64 * dt));
            decade *= 10.0;
        }
        v.push(t_end);
        v.retain(|&t| (0.0..=t_end).contains(&t));
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * b.abs().max(1.0));
        v
    }
}

/// Long-horizon run from the excited state on the plan's output grid.
pub fn long_time_run(spec: &RunSpec, t_end: f64, plan: &LongRunPlan) -> Result<Trajectory> {
    if t_end < 1e3 {
        return Err(invalid("t_end", format!("long runs need t_end ≥ 1e3, got {t_end}")));
    }
    let (p, _) = spec.propagator(t_end)?;
    p.run(0.0, QubitState::excited(), &plan.times(spec.qubit.delta(), t_end))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda2: f64, s: f64, order: Order, mode: Mode) -> RunSpec<'static> {
        RunSpec {
            qubit: QubitSpec::new(1.0, PI / 16.0).unwrap(),
            bath: BathSpec::new(lambda2, s, 10.0).unwrap(),
            order,
            mode,
            tol: Tolerances::default(),
            cache_dir: None,
        }
    }

    #[test]
    fn free_evolution_phase_convention() {
        let p = Propagator::free(1.0, Tolerances::default());
        let x0 = QubitState::new(0.3, 0.2, 0.0);
        let times: Vec<f64> = (1..=40).map(|k| k as f64 * 0.5).collect();
        let tr = p.run(0.0, x0, &times).unwrap();
        for (t, s) in &tr.samples {
            let want = x0.rho12() * num_complex::Complex64::from_polar(1.0, *t);
            assert!((s.rho12() - want).norm() < 1e-9, "t={t}");
            assert_eq!(s.rho22, 0.3);
        }
    }

    #[test]
    fn zero_coupling_keeps_excited_state() {
        let tr = propagate(&spec(0.0, 0.5, Order::Tcl4, Mode::Full), 30.0, &Sampling::Uniform { dt: 0.5 }).unwrap();
        for (_, s) in &tr.samples {
            assert_eq!(s.as_array(), [1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn dense_output_matches_step_endpoints() {
        // harmonic oscillator via free rotation; dense output vs exact solution
        let p = Propagator::free(
            3.0,
            Tolerances {
                rtol: 1e-8,
                atol: 1e-10,
                ..Default::default()
            },
        );
        let times: Vec<f64> = (1..500).map(|k| k as f64 * 0.0123).collect();
        let tr = p.run(0.0, QubitState::new(0.5, 0.4, 0.1), &times).unwrap();
        for (t, s) in &tr.samples {
            let want = num_complex::Complex64::new(0.4, 0.1) * num_complex::Complex64::from_polar(1.0, 3.0 * t);
            assert!((s.rho12() - want).norm() < 1e-7);
        }
    }

    #[test]
    fn leaving_the_escape_bound_ends_the_run() {
        let p = Propagator::free(
            1.0,
            Tolerances {
                escape: 0.45,
                ..Default::default()
            },
        );
        let times: Vec<f64> = (1..100).map(f64::from).collect();
        let tr = p.run(0.0, QubitState::new(0.5, 0.4, 0.3), &times).unwrap();
        let stop = tr.meta.escaped_at.unwrap();
        assert!(stop < 1.0 && tr.is_empty());
        let inside = Propagator::free(1.0, Tolerances::default())
            .run(0.0, QubitState::new(0.5, 0.4, 0.3), &times)
            .unwrap();
        assert_eq!((inside.len(), inside.meta.escaped_at), (99, None));
    }

    #[test]
    fn tcl2_coherence_plateau_is_second_order() {
        // TCL2 carries the O(λ²) coherence shift but not the O(λ²) population,
        // which needs the fourth-order generator
        let sp = spec(0.01, 0.72, Order::Tcl2, Mode::Full);
        let t_end = 400.0;
        let tr = propagate(&sp, t_end, &Sampling::Uniform { dt: 0.05 }).unwrap();
        let late: Vec<_> = tr.window(t_end - 2.0 * PI, t_end).to_vec();
        let mean = |f: fn(&QubitState) -> f64| late.iter().map(|s| f(&s.1)).sum::<f64>() / late.len() as f64;
        let want = crate::qubit::asymptotic_state(&sp.qubit, &sp.bath).unwrap();
        let re = mean(|s| s.re_rho12);
        assert!((re - want.re_rho12).abs() < 0.05 * want.re_rho12, "{re} vs {}", want.re_rho12);
        assert!(mean(|s| s.rho22).abs() < 0.1 * want.rho22);
        for (_, s) in &tr.samples {
            assert!((s.rho11() + s.rho22 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn plan_contains_windows() {
        let plan = LongRunPlan::default();
        let times = plan.times(1.0, 1e4);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 1e4);
        for c in plan.centres(1.0, 1e4) {
            assert!(times.iter().any(|&t| (t - (c - PI)).abs() < 1e-9));
        }
    }
}
