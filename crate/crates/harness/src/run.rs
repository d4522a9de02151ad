use crate::config::{RunConfig, RunMode};
use crate::csvio::{write_coarse, write_trajectory};
use crate::error::{HarnessError, Result};
use crate::manifest::{Files, Manifest, Propagation, Summary, COARSE_FILE, MANIFEST_FILE, TRAJECTORY_FILE};
use iqi_core::analysis::{
    adiabatic_predictor, coarse_grain, cutoff_coarse_grained, find_t_iq, fit_envelope_power_law, fit_envelope_power_law_within, fit_relaxation,
    oscillation_amplitude_ratio, Decoherence,
};
use iqi_core::cache::CacheStatus;
use iqi_core::propagator::{LongRunPlan, Mode, RunSpec, Sampling, Trajectory};
use iqi_core::qubit::{asymptotic_state, fgr_rate, QubitState};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub struct RunOutput {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub raw: Trajectory,
    /// Coarse-grained trajectory (with the cutoff applied in cutoff mode).
    pub cg: Trajectory,
}

fn cache_label(c: CacheStatus) -> &'static str {
    match c {
        CacheStatus::Disabled => "disabled",
        CacheStatus::Hit => "hit",
        CacheStatus::Miss => "miss",
    }
}

fn generator_mode(cfg: &RunConfig) -> Mode {
    match cfg.mode {
        RunMode::Averaged => Mode::Averaged(cfg.averaging),
        _ => Mode::Full,
    }
}

fn output_times(cfg: &RunConfig) -> Result<Vec<f64>> {
    if cfg.mode.is_long() {
        Ok(LongRunPlan::default().times(cfg.delta, cfg.t_end))
    } else {
        Ok(Sampling::Uniform { dt: cfg.dt }.times(cfg.t_end)?)
    }
}

fn propagate(cfg: &RunConfig, times: &[f64], cache_dir: Option<&Path>) -> iqi_core::Result<(Trajectory, CacheStatus)> {
    let spec = RunSpec {
        qubit: iqi_core::Qubit::new(cfg.delta, cfg.theta)?,
        bath: iqi_core::Bath::new(cfg.lambda2, cfg.s, cfg.omega_c)?,
        order: cfg.order,
        mode: generator_mode(cfg),
        tol: cfg.tolerances(),
        cache_dir,
    };
    let (p, status) = spec.propagator(cfg.t_end)?;
    Ok((p.run(0.0, QubitState::excited(), times)?, status))
}

/// Fits and derived quantities; each failure becomes a note rather than an error.
fn analyse(cfg: &RunConfig, raw: &Trajectory) -> (Trajectory, Summary) {
    let mut sum = Summary::default();
    let mut notes = Vec::new();
    let qubit = cfg.qubit().expect("validated");
    let bath = cfg.bath().expect("validated");
    let mut cg = Trajectory::from_samples(vec![]).expect("empty trajectory is valid");

    if cfg.lambda2 > 0.0 {
        let t1 = fgr_rate(&qubit, &bath).t1;
        sum.t1_golden_rule = Some(t1);
        // the relaxation fit uses the first 20 T1; later the plateau drifts
        let early = Trajectory::from_samples(raw.window(0.0, 20.0 * t1).to_vec()).expect("subset of a valid trajectory");
        match fit_relaxation(&early, 1.0 / t1) {
            Ok(f) => {
                sum.t1_fit = Some(f.t1);
                sum.rho22_plateau_fit = Some(f.p_inf);
            }
            Err(e) => notes.push(format!("relaxation fit: {e}")),
        }
        match asymptotic_state(&qubit, &bath) {
            Ok(a) => {
                sum.rho22_second_order = Some(a.rho22);
                sum.re_rho12_second_order = Some(a.re_rho12);
            }
            Err(e) => notes.push(format!("second-order plateau: {e}")),
        }
        if bath.is_sub_ohmic() {
            match adiabatic_predictor(&qubit, &bath) {
                Ok(a) => {
                    sum.adiabatic_t_iq = Some(a.t_iq);
                    sum.adiabatic_t_iq_scaling = Some(a.t_iq_scaling);
                }
                Err(e) => notes.push(format!("adiabatic prediction: {e}")),
            }
        }
    }

    if let Some(t) = raw.meta.escaped_at {
        notes.push(format!("state left the physical neighbourhood at t = {t:.6e}; integration stopped there"));
    }
    match coarse_grain(raw, cfg.window()) {
        Ok(c) => cg = c,
        Err(e) => notes.push(format!("coarse graining: {e}")),
    }
    if !cg.is_empty() {
        match find_t_iq(&cg) {
            Ok(Decoherence::Decohered { t_iq, omega_iq, imag_crossing }) => {
                sum.decoherence = Some("decohered".into());
                sum.t_iq = Some(t_iq);
                sum.omega_iq = Some(omega_iq);
                sum.im_crossing = imag_crossing;
            }
            Ok(Decoherence::NotYetDecohered) => sum.decoherence = Some("not_yet_decohered".into()),
            Err(e) => notes.push(format!("T_IQ: {e}")),
        }
    }

    let envelope = if cfg.mode.is_long() {
        // revivals are fitted over the last decade before 2·T_IQ (or the end of
        // the computed span); far past T_IQ the dynamics are no longer physical
        let mut hi = raw.samples.last().map_or(cfg.t_end, |s| s.0);
        if let Some(t_iq) = sum.t_iq {
            hi = hi.min(2.0 * t_iq);
        }
        let w = [hi / 10.0, hi];
        sum.envelope_window = Some(w);
        fit_envelope_power_law_within(raw, cfg.delta, w[0], w[1])
    } else {
        fit_envelope_power_law(raw, cfg.delta)
    };
    match envelope {
        Ok(f) => {
            sum.envelope_k = Some(f.k);
            sum.envelope_c = Some(f.c);
        }
        Err(e) => notes.push(format!("envelope fit: {e}")),
    }

    if let (true, Some(t_iq)) = (cfg.mode.is_long(), sum.t_iq) {
        let half = std::f64::consts::PI / cfg.delta;
        let centres = LongRunPlan::default().centres(cfg.delta, cfg.t_end);
        let c = centres.iter().copied().min_by(|a, b| (a - t_iq).abs().total_cmp(&(b - t_iq).abs()));
        match c.map(|c| oscillation_amplitude_ratio(raw, c - half, c + half)) {
            Some(Ok(r)) => sum.amplitude_ratio_at_t_iq = Some(r),
            Some(Err(e)) => notes.push(format!("amplitude ratio: {e}")),
            None => {}
        }
    }

    if cfg.mode == RunMode::Cutoff {
        match sum.t_iq {
            Some(t_iq) => match cutoff_coarse_grained(&cg, t_iq) {
                Ok(c) => {
                    cg = c;
                    sum.cutoff = Some(t_iq);
                }
                Err(e) => notes.push(format!("cutoff: {e}")),
            },
            None => notes.push("cutoff: no T_IQ within the run, dynamics left untouched".into()),
        }
    }
    sum.notes = notes;
    (cg, sum)
}

/// Validate, propagate, analyse and write `trajectory.csv`, `coarse.csv` and
/// `manifest.json` into `<output.dir>/<output.name>/`.
///
/// A numerical failure still leaves a manifest with status "failed".
pub fn run_simulation(cfg: &RunConfig, cache_dir: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let times = output_times(cfg)?;
    let dir = cfg.run_dir();
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let mut manifest = Manifest {
        tool: "iqi".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.to_pairs(),
        status: "failed".into(),
        error: None,
        started_unix,
        wall_time_s: 0.0,
        cache: cache_label(CacheStatus::Disabled).into(),
        files: Files::default(),
        propagation: None,
        summary: Summary::default(),
    };

    let (raw, status) = match propagate(cfg, &times, cache_dir) {
        Ok(x) => x,
        Err(e) => {
            manifest.error = Some(e.to_string());
            manifest.wall_time_s = clock.elapsed().as_secs_f64();
            manifest.write(&manifest_path)?;
            return Err(e.into());
        }
    };
    manifest.cache = cache_label(status).into();
    let m = &raw.meta;
    manifest.propagation = Some(Propagation {
        generator: m.mode.clone(),
        rtol: m.tolerances.rtol,
        atol: m.tolerances.atol,
        accepted_steps: m.stats.accepted,
        rejected_steps: m.stats.rejected,
        rhs_evaluations: m.stats.rhs_evals,
        h_min: m.stats.h_min,
        h_max: m.stats.h_max,
        samples: raw.len(),
        positivity_violations: m.positivity_violations,
        escaped_at: m.escaped_at,
    });

    let (cg, summary) = analyse(cfg, &raw);
    write_trajectory(&dir.join(TRAJECTORY_FILE), &raw)?;
    manifest.files.trajectory = Some(TRAJECTORY_FILE.into());
    if !cg.is_empty() {
        write_coarse(&dir.join(COARSE_FILE), &raw, &cg)?;
        manifest.files.coarse = Some(COARSE_FILE.into());
    }
    manifest.summary = summary;
    manifest.status = "ok".into();
    manifest.wall_time_s = clock.elapsed().as_secs_f64();
    manifest.write(&manifest_path)?;
    Ok(RunOutput {
        manifest,
        manifest_path,
        raw,
        cg,
    })
}

/// Re-run the configuration recorded in a manifest, optionally elsewhere.
pub fn reproduce(manifest_path: &Path, out_dir: Option<&Path>, cache_dir: Option<&Path>) -> Result<RunOutput> {
    let m = Manifest::read(manifest_path)?;
    let mut cfg = RunConfig::from_pairs(&m.config)?;
    if let Some(d) = out_dir {
        cfg.out_dir = d.to_path_buf();
    }
    run_simulation(&cfg, cache_dir)
}
