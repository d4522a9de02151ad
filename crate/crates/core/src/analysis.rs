//! Derived quantities: coarse-graining, entropy, the coherence zero crossing,
//! relaxation / envelope / scaling fits, the adiabatic closed forms and
//! physical-unit estimates.

use crate::bath::{c_factor, c_factor_limit, lamb_shift, lamb_shift_at_zero, lamb_shift_derivative, BathSpec};
use crate::error::{invalid, Error, Result};
use crate::fit::{levenberg_marquardt, linear_lsq, r_squared, LsqFit};
use crate::propagator::Trajectory;
use crate::qubit::{fgr_rate, QubitSpec, QubitState};
use std::f64::consts::PI;

/// Ohmic critical coupling in the Toulouse limit, 1/(2cos²(π/16)).
pub fn toulouse_constant() -> f64 {
    1.0 / (2.0 * (PI / 16.0).cos().powi(2))
}

/// Quoted value of the s → 1⁻ limit constant, kept alongside the direct evaluation.
pub const LIMIT_CONSTANT_QUOTED: f64 = 0.450;

/// lim_{s→1⁻} 1/(|A₁₂|²√(4πc_s)) with c_s → 2π.
pub fn limit_constant(qubit: &QubitSpec<f64>) -> f64 {
    let a12 = qubit.coupling_matrix().a12;
    1.0 / (a12 * a12 * (4.0 * PI * c_factor_limit::<f64>()).sqrt())
}

/// Centred moving average over `window` with trapezoidal weights on the
/// sample grid. Times whose window leaves the data, or spans a gap wider than
/// window/8, are omitted.
pub fn coarse_grain(traj: &Trajectory, window: f64) -> Result<Trajectory> {
    let s = &traj.samples;
    if !(window > 0.0) {
        return Err(invalid("window", "must be positive"));
    }
    if s.len() < 2 || s.last().unwrap().0 - s[0].0 < window {
        return Err(Error::InsufficientData(format!("trajectory shorter than the window {window}")));
    }
    let t: Vec<f64> = s.iter().map(|x| x.0).collect();
    let comps: Vec<[f64; 3]> = s.iter().map(|x| x.1.as_array()).collect();
    // running integrals of the piecewise-linear interpolant
    let mut cum = vec![[0.0; 3]; s.len()];
    for i in 1..s.len() {
        let h = t[i] - t[i - 1];
        for c in 0..3 {
            cum[i][c] = cum[i - 1][c] + 0.5 * h * (comps[i][c] + comps[i - 1][c]);
        }
    }
    let integral_to = |x: f64| -> [f64; 3] {
        let j = t.partition_point(|&v| v <= x).clamp(1, t.len() - 1) - 1;
        let h = t[j + 1] - t[j];
        let f = (x - t[j]) / h;
        let mut out = [0.0; 3];
        for c in 0..3 {
            let mid = comps[j][c] + f * (comps[j + 1][c] - comps[j][c]);
            out[c] = cum[j][c] + 0.5 * (x - t[j]) * (comps[j][c] + mid);
        }
        out
    };
    // gaps too wide to average across
    let max_gap = window / 8.0;
    let big: Vec<usize> = (1..t.len()).filter(|&i| t[i] - t[i - 1] > max_gap).collect();
    let half = 0.5 * window;
    let mut out = Vec::new();
    for &ti in &t {
        let (lo, hi) = (ti - half, ti + half);
        // window edges built from the sampling plan are exact only to rounding
        let eps = 1e-12 * window + 8.0 * f64::EPSILON * ti.abs();
        if lo < t[0] - eps || hi > t[t.len() - 1] + eps {
            continue;
        }
        let lo = lo.max(t[0]);
        let hi = hi.min(t[t.len() - 1]);
        // a gap (t[i−1], t[i]) overlapping the window disqualifies it
        let first = big.partition_point(|&i| t[i] <= lo + eps);
        if first < big.len() && t[big[first] - 1] < hi - eps {
            continue;
        }
        let a = integral_to(lo);
        let b = integral_to(hi);
        let v: [f64; 3] = std::array::from_fn(|c| (b[c] - a[c]) / (hi - lo));
        out.push((ti, QubitState::from_array(v)));
    }
    let mut meta = traj.meta.clone();
    meta.mode = format!("{}+coarse", meta.mode);
    Trajectory::new(out, meta)
}

/// Von Neumann entropy; eigenvalues in [−1e−9, 0) count as zero.
pub fn entropy(state: &QubitState) -> Result<f64> {
    let ev = state.eigenvalues();
    if ev[0] < -1e-9 {
        return Err(invalid("state", format!("eigenvalue {} is significantly negative", ev[0])));
    }
    Ok(ev.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decoherence {
    Decohered {
        t_iq: f64,
        omega_iq: f64,
        /// First sign change of Im ρ₁₂ (diagnostic only).
        imag_crossing: Option<f64>,
    },
    NotYetDecohered,
}

impl Decoherence {
    pub fn t_iq(&self) -> Option<f64> {
        match self {
            Decoherence::Decohered { t_iq, .. } => Some(*t_iq),
            Decoherence::NotYetDecohered => None,
        }
    }
}

fn first_crossing(pts: &[(f64, f64)]) -> Option<f64> {
    pts.windows(2).find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0).map(|w| {
        let (t0, y0) = w[0];
        let (t1, y1) = w[1];
        t0 + (t1 - t0) * y0 / (y0 - y1)
    })
}

/// First downward zero of the coarse-grained Re ρ₁₂ after it has become
/// positive, linearly interpolated.
pub fn find_t_iq(cg: &Trajectory) -> Result<Decoherence> {
    if cg.is_empty() {
        return Err(Error::InsufficientData("empty trajectory".into()));
    }
    // the early transient may pass through negative values before the plateau builds up
    let re: Vec<(f64, f64)> = cg.samples.iter().map(|s| (s.0, s.1.re_rho12)).skip_while(|p| p.1 <= 0.0).collect();
    if re.is_empty() {
        return Err(Error::InsufficientData("coarse-grained coherence never becomes positive".into()));
    }
    let Some(t_iq) = first_crossing(&re) else {
        return Ok(Decoherence::NotYetDecohered);
    };
    let im: Vec<(f64, f64)> = cg.samples.iter().map(|s| (s.0, s.1.im_rho12)).collect();
    let sign = im.iter().find(|p| p.1 != 0.0).map_or(1.0, |p| p.1.signum());
    let flipped: Vec<(f64, f64)> = im.iter().map(|&(t, v)| (t, sign * v)).collect();
    Ok(Decoherence::Decohered {
        t_iq,
        omega_iq: 1.0 / t_iq,
        imag_crossing: first_crossing(&flipped),
    })
}

/// Coarse-grained trajectory with the dynamics cut off at `t_cut`: a sample is
/// inserted at `t_cut` and from there on ρ_cg is frozen, diagonal, at the
/// population interpolated there.
pub fn cutoff_coarse_grained(cg: &Trajectory, t_cut: f64) -> Result<Trajectory> {
    let s = &cg.samples;
    if s.is_empty() {
        return Err(Error::InsufficientData("empty trajectory".into()));
    }
    if !(t_cut >= s[0].0 && t_cut <= s[s.len() - 1].0) {
        return Err(invalid("t_cut", format!("{t_cut} outside the sampled range")));
    }
    let j = s.partition_point(|x| x.0 < t_cut);
    let rho22 = if s[j].0 == t_cut || j == 0 {
        s[j].1.rho22
    } else {
        let (a, b) = (&s[j - 1], &s[j]);
        a.1.rho22 + (b.1.rho22 - a.1.rho22) * (t_cut - a.0) / (b.0 - a.0)
    };
    let frozen = QubitState::new(rho22, 0.0, 0.0);
    let mut out: Vec<(f64, QubitState)> = s[..j].to_vec();
    out.push((t_cut, frozen));
    out.extend(s[j..].iter().filter(|x| x.0 > t_cut).map(|x| (x.0, frozen)));
    let mut meta = cg.meta.clone();
    meta.cutoff = Some(t_cut);
    Trajectory::new(out, meta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationFit {
    pub nu1: f64,
    pub t1: f64,
    pub p_inf: f64,
    /// Amplitude of the decaying part; 1 − p∞ without an initial slip.
    pub amplitude: f64,
    pub fit: LsqFit,
}

/// Fit ρ₂₂(t) = p∞ + A·e^{−ν₁t}, starting from `nu_guess`. The free amplitude
/// absorbs the short non-Markovian transient at the start.
pub fn fit_relaxation(traj: &Trajectory, nu_guess: f64) -> Result<RelaxationFit> {
    let pts: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.0, s.1.rho22)).collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData("need at least 4 samples".into()));
    }
    let p_end = pts.last().unwrap().1.clamp(0.0, 0.5);
    let p0 = [nu_guess, p_end, 1.0 - p_end];
    let fit = levenberg_marquardt(
        |p| pts.iter().map(|&(t, y)| p[1] + p[2] * (-p[0] * t).exp() - y).collect(),
        |p| {
            pts.iter()
                .map(|&(t, _)| {
                    let e = (-p[0] * t).exp();
                    vec![-p[2] * t * e, 1.0, e]
                })
                .collect()
        },
        &p0,
        500,
    )?;
    let nu1 = fit.params[0];
    if !(nu1 > 0.0) {
        return Err(Error::Degenerate(format!("fitted rate {nu1} is not a decay")));
    }
    Ok(RelaxationFit {
        nu1,
        t1: 1.0 / nu1,
        p_inf: fit.params[1],
        amplitude: fit.params[2],
        fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    pub c: f64,
    pub k: f64,
    pub peaks: Vec<(f64, f64)>,
    pub fit: LsqFit,
}

/// Extrema of Im ρ₁₂ (maxima and minima, each extremal within ±half a
/// period) reported as peaks of |Im ρ₁₂|; only fully sampled neighbourhoods count.
pub fn envelope_peaks(traj: &Trajectory, delta: f64) -> Vec<(f64, f64)> {
    let half = PI / delta;
    let s = &traj.samples;
    let v: Vec<f64> = s.iter().map(|x| x.1.im_rho12).collect();
    let t: Vec<f64> = s.iter().map(|x| x.0).collect();
    let mut peaks = Vec::new();
    let mut lo = 0;
    let mut hi = 0;
    for i in 0..s.len() {
        while t[lo] < t[i] - half {
            lo += 1;
        }
        while hi + 1 < s.len() && t[hi + 1] <= t[i] + half {
            hi += 1;
        }
        let covered = lo > 0 && hi + 1 < s.len() && t[lo - 1] >= t[i] - half - half / 8.0 && t[hi + 1] <= t[i] + half + half / 8.0;
        if !covered || (lo..hi).any(|j| t[j + 1] - t[j] > half / 4.0) {
            continue;
        }
        let is_max = v[i] > 0.0 && (lo..=hi).all(|j| v[j] <= v[i]);
        let is_min = v[i] < 0.0 && (lo..=hi).all(|j| v[j] >= v[i]);
        if is_max || is_min {
            peaks.push((t[i], v[i].abs()));
        }
    }
    peaks
}

/// Fit peak(t) = c·t^k on log–log axes.
pub fn fit_envelope_power_law(traj: &Trajectory, delta: f64) -> Result<EnvelopeFit> {
    fit_envelope_power_law_within(traj, delta, 0.0, f64::INFINITY)
}

/// As [`fit_envelope_power_law`], using only peaks with t in [t_lo, t_hi].
/// The revival envelope first decays and then grows, so the exponent depends
/// on the window.
pub fn fit_envelope_power_law_within(traj: &Trajectory, delta: f64, t_lo: f64, t_hi: f64) -> Result<EnvelopeFit> {
    let peaks: Vec<(f64, f64)> = envelope_peaks(traj, delta)
        .into_iter()
        .filter(|p| p.0 > 0.0 && p.0 >= t_lo && p.0 <= t_hi)
        .collect();
    if peaks.len() < 5 {
        return Err(Error::InsufficientData(format!("{} envelope peaks found, need 5", peaks.len())));
    }
    let rows: Vec<Vec<f64>> = peaks.iter().map(|p| vec![1.0, p.0.ln()]).collect();
    let y: Vec<f64> = peaks.iter().map(|p| p.1.ln()).collect();
    let fit = linear_lsq(&rows, &y)?;
    Ok(EnvelopeFit {
        c: fit.params[0].exp(),
        k: fit.params[1],
        peaks,
        fit,
    })
}

/// One point of a sweep entering the scaling fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub s: f64,
    pub lambda2: f64,
    pub omega_iq: f64,
}

/// ω_IQ = ω₀ (λ²/λ_c²)^{z/(1−s)}.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub omega0: f64,
    pub lambda_c2: f64,
    pub z: f64,
    /// Covariance of (ln ω₀, ln λ_c², z).
    pub covariance: Vec<Vec<f64>>,
    pub rms_log: f64,
    pub points: usize,
}

impl ScalingFit {
    pub fn rate(&self, s: f64, lambda2: f64) -> f64 {
        self.omega0 * (lambda2 / self.lambda_c2).powf(self.z / (1.0 - s))
    }
}

fn distinct(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if !out.iter().any(|&y| (y - x).abs() <= 1e-12 * x.abs().max(1.0)) {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Nonlinear least squares of ln ω_IQ against the three-parameter law.
pub fn fit_scaling_law(points: &[RatePoint]) -> Result<ScalingFit> {
    let pts: Vec<RatePoint> = points.iter().copied().filter(|p| p.omega_iq > 0.0 && p.lambda2 > 0.0 && p.s < 1.0).collect();
    let ss = distinct(pts.iter().map(|p| p.s));
    if ss.len() < 3 {
        return Err(Error::Degenerate(format!("need ≥ 3 distinct s values, got {}", ss.len())));
    }
    for s in &ss {
        let n = distinct(pts.iter().filter(|p| (p.s - s).abs() < 1e-12).map(|p| p.lambda2)).len();
        if n < 3 {
            return Err(Error::Degenerate(format!("s = {s} has {n} coupling values, need ≥ 3")));
        }
    }
    // linear in (ln ω₀, z, z·ln λ_c²) for the starting point
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.lambda2.ln() / (1.0 - p.s), -1.0 / (1.0 - p.s)]).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.omega_iq.ln()).collect();
    let lin = linear_lsq(&rows, &y)?;
    let z0 = lin.params[1];
    if z0 == 0.0 {
        return Err(Error::Degenerate("rates independent of coupling".into()));
    }
    let p0 = [lin.params[0], lin.params[2] / z0, z0];
    let model = |p: &[f64], q: &RatePoint| p[0] + p[2] / (1.0 - q.s) * (q.lambda2.ln() - p[1]);
    let fit = levenberg_marquardt(
        |p| pts.iter().zip(&y).map(|(q, yy)| model(p, q) - yy).collect(),
        |p| {
            pts.iter()
                .map(|q| vec![1.0, -p[2] / (1.0 - q.s), (q.lambda2.ln() - p[1]) / (1.0 - q.s)])
                .collect()
        },
        &p0,
        200,
    )?;
    Ok(ScalingFit {
        omega0: fit.params[0].exp(),
        lambda_c2: fit.params[1].exp(),
        z: fit.params[2],
        covariance: fit.covariance,
        rms_log: fit.rms,
        points: pts.len(),
    })
}

/// Points (s, ln λ²) where the interpolated ω_IQ equals a fixed level, and the
/// straight line through them.
#[derive(Debug, Clone, PartialEq)]
pub struct Locus {
    pub omega_iq: f64,
    pub points: Vec<(f64, f64)>,
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
    /// Extrapolated λ² at s = 1.
    pub lambda2_at_s1: f64,
}

/// Fixed-ω_IQ loci by linear interpolation in (ln λ², ln ω_IQ) per s.
pub fn fixed_rate_loci(points: &[RatePoint], levels: &[f64]) -> Result<Vec<Locus>> {
    let ss = distinct(points.iter().map(|p| p.s));
    let mut out = Vec::new();
    for &level in levels {
        let target = level.ln();
        let mut pts = Vec::new();
        for &s in &ss {
            let mut curve: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| (p.s - s).abs() < 1e-12 && p.omega_iq > 0.0)
                .map(|p| (p.lambda2.ln(), p.omega_iq.ln()))
                .collect();
            curve.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if let Some(x) = curve.windows(2).find_map(|w| {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                ((y0 - target) * (y1 - target) <= 0.0 && y0 != y1).then(|| x0 + (x1 - x0) * (target - y0) / (y1 - y0))
            }) {
                pts.push((s, x));
            }
        }
        if pts.len() < 2 {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (intercept, slope) = if pts.len() == 2 {
            let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            (ys[0] - slope * xs[0], slope)
        } else {
            let f = linear_lsq(&xs.iter().map(|&x| vec![1.0, x]).collect::<Vec<_>>(), &ys)?;
            (f.params[0], f.params[1])
        };
        out.push(Locus {
            omega_iq: level,
            r2: r_squared(&xs, &ys, intercept, slope),
            lambda2_at_s1: (intercept + slope).exp(),
            points: pts,
            intercept,
            slope,
        });
    }
    if out.is_empty() {
        return Err(Error::InsufficientData("no level is bracketed by two or more s values".into()));
    }
    Ok(out)
}

/// Coherence drift predicted by the adiabatic solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticPrediction {
    /// ρ₁₂(t)/ρ′₁₂ = 1 − d t^{1−s}
    pub drift: f64,
    /// scaling-limit form 1 − d_∞ t^{1−s}
    pub drift_scaling: f64,
    pub t_iq: f64,
    pub t_iq_scaling: f64,
}

impl AdiabaticPrediction {
    pub fn ratio(&self, s: f64, t: f64) -> f64 {
        1.0 - self.drift * t.powf(1.0 - s)
    }
    pub fn ratio_scaling(&self, s: f64, t: f64) -> f64 {
        1.0 - self.drift_scaling * t.powf(1.0 - s)
    }
    pub fn omega_iq(&self) -> f64 {
        1.0 / self.t_iq
    }
    pub fn omega_iq_scaling(&self) -> f64 {
        1.0 / self.t_iq_scaling
    }
}

pub fn adiabatic_predictor(qubit: &QubitSpec<f64>, bath: &BathSpec<f64>) -> Result<AdiabaticPrediction> {
    let s = bath.s();
    if !bath.is_sub_ohmic() {
        return Err(invalid("s", "the adiabatic solution needs s < 1"));
    }
    let cs = c_factor(s)?;
    let a12 = qubit.coupling_matrix().a12;
    let d = qubit.delta();
    let l2 = bath.lambda2();
    let wc = bath.omega_c();
    let t1 = fgr_rate(qubit, bath).t1;
    let sp = lamb_shift_derivative(bath, -d)?;
    let gap = lamb_shift_at_zero(bath) - lamb_shift(bath, -d)?;
    // sign guard: both S′(−Δ) and S(0) − S(−Δ) are negative
    if !(sp < 0.0 && gap < 0.0) {
        return Err(Error::Degenerate(format!("unexpected Lamb-shift signs S′={sp}, S(0)−S(−Δ)={gap}")));
    }
    // bath quantities above are linear in λ²; the unit-coupling drift is λ²-free
    let drift = cs * l2 * a12 * a12 * sp * wc.powf(1.0 - s) / (t1 * gap);
    let drift_scaling = 4.0 * PI * cs * l2 * l2 * a12.powi(4) * (wc * wc / d).powf(1.0 - s);
    Ok(AdiabaticPrediction {
        drift,
        drift_scaling,
        t_iq: drift.powf(-1.0 / (1.0 - s)),
        t_iq_scaling: drift_scaling.powf(-1.0 / (1.0 - s)),
    })
}

/// Fit Re ρ₁₂(t) ≈ a − b·t^{1−s} on [t_lo, t_hi] of a coarse-grained run.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftFit {
    pub plateau: f64,
    pub slope: f64,
    /// slope/plateau, comparable with the adiabatic d.
    pub coefficient: f64,
    pub fit: LsqFit,
}

pub fn fit_coherence_drift(cg: &Trajectory, s: f64, t_lo: f64, t_hi: f64) -> Result<DriftFit> {
    let pts = cg.window(t_lo, t_hi);
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!("{} samples in the drift window", pts.len())));
    }
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, -p.0.powf(1.0 - s)]).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.re_rho12).collect();
    let fit = linear_lsq(&rows, &y)?;
    Ok(DriftFit {
        plateau: fit.params[0],
        slope: fit.params[1],
        coefficient: fit.params[1] / fit.params[0],
        fit,
    })
}

/// ω_IQ from a scaling fit, converted to Hz with the physical splitting.
pub fn physical_estimate(fit: &ScalingFit, s: f64, lambda2: f64, delta_hz: f64) -> Result<f64> {
    if !(s < 1.0) || !(lambda2 > 0.0) || !(delta_hz > 0.0) {
        return Err(invalid("physical_estimate", "need s < 1, λ² > 0 and a positive splitting"));
    }
    Ok(fit.rate(s, lambda2) * delta_hz)
}

/// Ratio of the oscillation amplitude (max − min over the window) of the
/// coherence to that of the population.
pub fn oscillation_amplitude_ratio(traj: &Trajectory, lo: f64, hi: f64) -> Result<f64> {
    let w = traj.window(lo, hi);
    if w.len() < 4 {
        return Err(Error::InsufficientData("window holds fewer than 4 samples".into()));
    }
    let span = |f: &dyn Fn(&QubitState) -> f64| {
        let (mn, mx) = w
            .iter()
            .map(|s| f(&s.1))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        mx - mn
    };
    let coh = span(&|s: &QubitState| s.im_rho12);
    let pop = span(&|s: &QubitState| s.rho22);
    if pop == 0.0 {
        return Err(Error::Degenerate("population does not oscillate".into()));
    }
    Ok(coh / pop)
}
