//! Parameter sweeps over (s, λ²).
//!
//! Grid points run concurrently; one appender thread owns the summary file
//! and writes each finished record as a complete line. Points already in the
//! summary are skipped, and the finished summary is rewritten in canonical
//! (s, λ²) order, so a rerun over a completed sweep leaves it byte-identical.

use crate::config::RunConfig;
use crate::csvio::{read_summary, summary_header_line, summary_line, write_summary, Status, SweepRecord};
use crate::error::{config, HarnessError, Result};
use crate::run::run_simulation;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_FILE: &str = "sweep.json";
pub const POINTS_DIR: &str = "points";

/// Desk-scale grid: three dispersions, four couplings each, every T_IQ below 1e5.
pub fn desk_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for (s, l2) in [
        (0.3, [0.005, 0.007, 0.01, 0.014]),
        (0.5, [0.018, 0.024, 0.032, 0.042]),
        (0.7, [0.075, 0.085, 0.095, 0.11]),
    ] {
        g.extend(l2.iter().map(|&l| (s, l)));
    }
    g
}

/// Base configuration of desk-scale sweeps.
pub fn desk_base() -> RunConfig {
    let mut c = RunConfig::preset("fig2").expect("preset exists");
    c.t_end = 1.5e5;
    c.name = "sweep".into();
    c
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub grid: Vec<(f64, f64)>,
    pub base: RunConfig,
    pub dir: PathBuf,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    pub base: BTreeMap<String, String>,
    pub grid: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// All records of the sweep directory, canonical order.
    pub records: Vec<SweepRecord>,
    pub computed: usize,
    pub skipped: usize,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn point_name(s: f64, lambda2: f64) -> String {
    format!("s{s:?}_l{lambda2:?}")
}

/// Configuration of one grid point.
pub fn point_config(base: &RunConfig, dir: &Path, s: f64, lambda2: f64) -> RunConfig {
    RunConfig {
        s,
        lambda2,
        out_dir: dir.join(POINTS_DIR),
        name: point_name(s, lambda2),
        ..base.clone()
    }
}

/// Base configuration as recorded, independent of where outputs go.
fn base_pairs(base: &RunConfig) -> BTreeMap<String, String> {
    let mut p = base.to_pairs();
    p.retain(|k, _| !k.starts_with("output.") && k != "bath.s" && k != "bath.lambda2");
    p
}

pub fn read_sweep_file(dir: &Path) -> Result<SweepFile> {
    let path = dir.join(SWEEP_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path, source })
}

/// Drop a partially written last line left by an interrupted appender.
fn truncate_partial_line(path: &Path) -> Result<()> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    if bytes.last().is_some_and(|&b| b != b'\n') {
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        std::fs::write(path, &bytes[..keep]).map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(())
}

fn record_from(s: f64, lambda2: f64, out: &crate::run::RunOutput) -> SweepRecord {
    let sum = &out.manifest.summary;
    let status = match sum.decoherence.as_deref() {
        Some("decohered") => Status::Decohered,
        Some("not_yet_decohered") => Status::NotYetDecohered,
        _ => Status::Failed,
    };
    SweepRecord {
        s,
        lambda2,
        status,
        t_iq: sum.t_iq,
        omega_iq: sum.omega_iq,
        k: sum.envelope_k,
        t1_fit: sum.t1_fit,
    }
}

fn run_point(base: &RunConfig, dir: &Path, s: f64, lambda2: f64, cache: &Path) -> SweepRecord {
    let cfg = point_config(base, dir, s, lambda2);
    let outcome = std::panic::catch_unwind(|| run_simulation(&cfg, Some(cache)));
    match outcome {
        Ok(Ok(out)) => record_from(s, lambda2, &out),
        _ => SweepRecord::failed(s, lambda2),
    }
}

fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.lambda2.total_cmp(&b.lambda2)));
}

/// Run (or resume) a sweep. The generator-table cache defaults to
/// `<dir>/cache` when no cache directory is given.
pub fn run_sweep(spec: &SweepSpec, cache_dir: Option<&Path>) -> Result<SweepOutcome> {
    if spec.grid.is_empty() {
        return Err(config("sweep grid is empty"));
    }
    if !spec.base.mode.is_long() {
        return Err(config(format!("sweeps need run.mode long_time or cutoff, got {}", spec.base.mode)));
    }
    let mut grid: Vec<(f64, f64)> = Vec::new();
    for &(s, l) in &spec.grid {
        point_config(&spec.base, &spec.dir, s, l).validate()?;
        if !grid.contains(&(s, l)) {
            grid.push((s, l));
        }
    }
    let dir = &spec.dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;

    let sweep_path = dir.join(SWEEP_FILE);
    let mut file = SweepFile {
        base: base_pairs(&spec.base),
        grid: grid.clone(),
    };
    if sweep_path.exists() {
        let old = read_sweep_file(dir)?;
        if old.base != file.base {
            return Err(config(format!("{} was produced with a different base configuration", dir.display())));
        }
        for p in old.grid {
            if !file.grid.contains(&p) {
                file.grid.push(p);
            }
        }
    }
    let text = serde_json::to_string_pretty(&file).map_err(|source| HarnessError::Json {
        path: sweep_path.clone(),
        source,
    })?;
    std::fs::write(&sweep_path, text + "\n").map_err(|e| HarnessError::io(&sweep_path, e))?;

    let summary_path = dir.join(SUMMARY_FILE);
    let mut existing = Vec::new();
    if summary_path.exists() {
        truncate_partial_line(&summary_path)?;
        existing = read_summary(&summary_path)?;
    } else {
        std::fs::write(&summary_path, summary_header_line()).map_err(|e| HarnessError::io(&summary_path, e))?;
    }
    let todo: Vec<(f64, f64)> = grid.iter().copied().filter(|&(s, l)| !existing.iter().any(|r| r.same_point(s, l))).collect();
    let skipped = grid.len() - todo.len();

    let cache = cache_dir.map(Path::to_path_buf).unwrap_or_else(|| dir.join("cache"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| config(format!("cannot start {} workers: {e}", spec.workers)))?;

    let mut fresh = Vec::new();
    if !todo.is_empty() {
        // build each s column's tables once so workers only read the cache
        let mut columns: Vec<f64> = todo.iter().filter(|p| p.1 > 0.0).map(|p| p.0).collect();
        columns.sort_by(f64::total_cmp);
        columns.dedup();
        pool.install(|| {
            columns.par_iter().for_each(|&s| {
                let cfg = point_config(&spec.base, dir, s, todo.iter().find(|p| p.0 == s).unwrap().1);
                let span = cfg.t_end + cfg.window();
                if let (Ok(b), Ok(q)) = (cfg.bath(), cfg.qubit()) {
                    // a failure here resurfaces, per point, in the runs themselves
                    let _ = iqi_core::cache::load_or_build(&b, &q, cfg.order, span, Some(&cache));
                }
            })
        });

        let (tx, rx) = mpsc::channel::<SweepRecord>();
        let appender = {
            let path = summary_path.clone();
            std::thread::spawn(move || -> Result<Vec<SweepRecord>> {
                let mut f = std::fs::OpenOptions::new().append(true).open(&path).map_err(|e| HarnessError::io(&path, e))?;
                let mut got = Vec::new();
                for rec in rx {
                    f.write_all(&summary_line(&rec)?).map_err(|e| HarnessError::io(&path, e))?;
                    f.sync_data().map_err(|e| HarnessError::io(&path, e))?;
                    got.push(rec);
                }
                Ok(got)
            })
        };
        pool.install(|| {
            todo.par_iter().for_each_with(tx, |tx, &(s, l)| {
                // the receiver outlives every sender
                let _ = tx.send(run_point(&spec.base, dir, s, l, &cache));
            })
        });
        fresh = appender.join().map_err(|_| config("summary appender panicked"))??;
    }

    let computed = fresh.len();
    let mut records = existing;
    records.extend(fresh);
    sort_records(&mut records);
    write_summary(&summary_path, &records)?;
    Ok(SweepOutcome { records, computed, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_grid_shape() {
        let g = desk_grid();
        assert_eq!(g.len(), 12);
        for s in [0.3, 0.5, 0.7] {
            assert_eq!(g.iter().filter(|p| p.0 == s).count(), 4);
        }
        desk_base().validate().unwrap();
    }

    #[test]
    fn partial_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "a,b\n1,2\n3,").unwrap();
        truncate_partial_line(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,2\n");
    }
}
