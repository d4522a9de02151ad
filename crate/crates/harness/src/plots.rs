//! Columnar plot data for the reference figures. Every file is CSV with a
//! header row; empty fields mark values that do not exist (e.g. ω_IQ of a
//! point that has not decohered).

use crate::config::RunConfig;
use crate::csvio::{fmt_f64, read_coarse, read_summary, read_trajectory, Status, SweepRecord, COARSE_HEADER};
use crate::error::{config, HarnessError, Result};
use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::sweep::{read_sweep_file, SUMMARY_FILE};
use iqi_core::analysis::{adiabatic_predictor, envelope_peaks, fixed_rate_loci, RatePoint};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Short-time relaxation with the coarse-grained overlay.
    Fig1,
    /// Long-time coherence, entropy and revival envelope.
    Fig2,
    /// ω_IQ against λ² per s, with the adiabatic overlays.
    Fig3a,
    /// Fixed-ω_IQ loci in the (s, λ²) plane.
    Fig3b,
    /// Revival exponent k against λ² per s.
    Fig4,
}

impl FromStr for Figure {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3a" => Ok(Figure::Fig3a),
            "fig3b" => Ok(Figure::Fig3b),
            "fig4" => Ok(Figure::Fig4),
            _ => Err(config(format!("unknown figure {s:?} (expected fig1, fig2, fig3a, fig3b or fig4)"))),
        }
    }
}

pub const FIG2_ENVELOPE_HEADER: [&str; 3] = ["t", "im_rho12_peak", "envelope_fit"];
pub const FIG3A_HEADER: [&str; 5] = ["s", "lambda2", "omega_IQ", "omega_IQ_adiabatic", "omega_IQ_scaling_limit"];
pub const FIG3B_HEADER: [&str; 4] = ["omega_IQ", "s", "lambda2", "lambda2_line"];
pub const FIG4_HEADER: [&str; 3] = ["s", "lambda2", "k"];

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(HarnessError::MissingInput(path.display().to_string()))
    }
}

/// A run directory or its manifest.
fn run_inputs(input: &Path) -> Result<(PathBuf, Manifest)> {
    let manifest_path = if input.is_dir() { input.join(MANIFEST_FILE) } else { input.to_path_buf() };
    let manifest = Manifest::read(&require(manifest_path.clone())?)?;
    if !manifest.is_ok() {
        return Err(HarnessError::MissingInput(format!("{} records a failed run", manifest_path.display())));
    }
    Ok((manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf(), manifest))
}

fn coarse_table(dir: &Path, m: &Manifest) -> Result<Vec<Vec<String>>> {
    let name = m
        .files
        .coarse
        .as_deref()
        .ok_or_else(|| HarnessError::MissingInput("run has no coarse-grained output".into()))?;
    let rows = read_coarse(&require(dir.join(name))?)?;
    Ok(rows
        .iter()
        .map(|r| {
            [r.t, r.raw.rho22, r.raw.re_rho12, r.raw.im_rho12, r.re_cg, r.im_cg, r.entropy]
                .map(fmt_f64)
                .to_vec()
        })
        .collect())
}

/// A sweep directory's summary and base configuration.
fn sweep_inputs(input: &Path) -> Result<(Vec<SweepRecord>, RunConfig)> {
    let dir = if input.is_dir() {
        input.to_path_buf()
    } else {
        input.parent().unwrap_or(Path::new(".")).to_path_buf()
    };
    let records = read_summary(&require(dir.join(SUMMARY_FILE))?)?;
    let base = RunConfig::from_pairs(&read_sweep_file(&dir)?.base)?;
    Ok((records, base))
}

fn rate_points(records: &[SweepRecord]) -> Vec<RatePoint> {
    records
        .iter()
        .filter(|r| r.status == Status::Decohered)
        .filter_map(|r| {
            r.omega_iq.map(|w| RatePoint {
                s: r.s,
                lambda2: r.lambda2,
                omega_iq: w,
            })
        })
        .collect()
}

/// Rate levels crossed by every s column where possible, else by any two.
pub fn locus_levels(points: &[RatePoint], n: usize) -> Vec<f64> {
    let mut ss: Vec<f64> = points.iter().map(|p| p.s).collect();
    ss.sort_by(f64::total_cmp);
    ss.dedup();
    let range = |s: f64| {
        let v: Vec<f64> = points.iter().filter(|p| p.s == s).map(|p| p.omega_iq.ln()).collect();
        (
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let ranges: Vec<(f64, f64)> = ss.iter().map(|&s| range(s)).collect();
    let mut lo = ranges.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let mut hi = ranges.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        lo = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        hi = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    }
    if !(lo < hi) {
        return vec![];
    }
    (1..=n).map(|i| (lo + (hi - lo) * i as f64 / (n + 1) as f64).exp()).collect()
}

/// Write the plot files of `figure` into `out_dir`; returns their paths.
///
/// fig1 and fig2 read a run directory (or its manifest); fig3a, fig3b and
/// fig4 read a sweep directory.
pub fn emit_plot_data(figure: Figure, input: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    match figure {
        Figure::Fig1 => {
            let (dir, m) = run_inputs(input)?;
            let path = out_dir.join("fig1.csv");
            write_table(&path, &COARSE_HEADER, &coarse_table(&dir, &m)?)?;
            written.push(path);
        }
        Figure::Fig2 => {
            let (dir, m) = run_inputs(input)?;
            let path = out_dir.join("fig2_coarse.csv");
            write_table(&path, &COARSE_HEADER, &coarse_table(&dir, &m)?)?;
            written.push(path);
            let name = m
                .files
                .trajectory
                .as_deref()
                .ok_or_else(|| HarnessError::MissingInput("run has no trajectory".into()))?;
            let raw = read_trajectory(&require(dir.join(name))?)?;
            let delta = RunConfig::from_pairs(&m.config)?.delta;
            let fit = m.summary.envelope_k.zip(m.summary.envelope_c);
            let rows: Vec<Vec<String>> = envelope_peaks(&raw, delta)
                .into_iter()
                .map(|(t, p)| vec![fmt_f64(t), fmt_f64(p), opt(fit.map(|(k, c)| c * t.powf(k)))])
                .collect();
            let path = out_dir.join("fig2_envelope.csv");
            write_table(&path, &FIG2_ENVELOPE_HEADER, &rows)?;
            written.push(path);
        }
        Figure::Fig3a => {
            let (records, base) = sweep_inputs(input)?;
            let mut rows = Vec::new();
            for r in &records {
                let cfg = RunConfig {
                    s: r.s,
                    lambda2: r.lambda2,
                    ..base.clone()
                };
                let pred = cfg.qubit().and_then(|q| Ok(adiabatic_predictor(&q, &cfg.bath()?)?)).ok();
                rows.push(vec![
                    fmt_f64(r.s),
                    fmt_f64(r.lambda2),
                    opt(r.omega_iq.filter(|_| r.status == Status::Decohered)),
                    opt(pred.map(|p| p.omega_iq())),
                    opt(pred.map(|p| p.omega_iq_scaling())),
                ]);
            }
            let path = out_dir.join("fig3a.csv");
            write_table(&path, &FIG3A_HEADER, &rows)?;
            written.push(path);
        }
        Figure::Fig3b => {
            let (records, _) = sweep_inputs(input)?;
            let pts = rate_points(&records);
            let loci = fixed_rate_loci(&pts, &locus_levels(&pts, 4))?;
            let mut rows = Vec::new();
            for l in &loci {
                let line = |s: f64| (l.intercept + l.slope * s).exp();
                for &(s, ln_l2) in &l.points {
                    rows.push(vec![fmt_f64(l.omega_iq), fmt_f64(s), fmt_f64(ln_l2.exp()), fmt_f64(line(s))]);
                }
                rows.push(vec![fmt_f64(l.omega_iq), fmt_f64(1.0), String::new(), fmt_f64(l.lambda2_at_s1)]);
            }
            let path = out_dir.join("fig3b.csv");
            write_table(&path, &FIG3B_HEADER, &rows)?;
            written.push(path);
        }
        Figure::Fig4 => {
            let (records, _) = sweep_inputs(input)?;
            let rows: Vec<Vec<String>> = records.iter().map(|r| vec![fmt_f64(r.s), fmt_f64(r.lambda2), opt(r.k)]).collect();
            let path = out_dir.join("fig4.csv");
            write_table(&path, &FIG4_HEADER, &rows)?;
            written.push(path);
        }
    }
    Ok(written)
}
