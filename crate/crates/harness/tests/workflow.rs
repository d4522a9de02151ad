//! Sweeps, manifest reproduction and plot data on small, fast configurations.

use iqi_harness::csvio::{read_summary, Status};
use iqi_harness::manifest::Manifest;
use iqi_harness::plots::{emit_plot_data, Figure};
use iqi_harness::sweep::{SUMMARY_FILE, SWEEP_FILE};
use iqi_harness::{reproduce, run_simulation, run_sweep, RunConfig, RunMode, SweepSpec};
use std::path::Path;

fn small_base() -> RunConfig {
    let mut c = RunConfig::preset("fig2").unwrap();
    c.t_end = 1e3;
    c
}

fn spec(dir: &Path, grid: Vec<(f64, f64)>, workers: usize) -> SweepSpec {
    SweepSpec {
        grid,
        base: small_base(),
        dir: dir.to_path_buf(),
        workers,
    }
}

#[test]
fn sweep_is_idempotent_and_resumable() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let dir = tmp.path().join("sweep");
    let grid = vec![(0.5, 0.06), (0.5, 0.05), (0.5, 0.01)];

    let first = run_sweep(&spec(&dir, grid.clone(), 2), Some(&cache)).unwrap();
    assert_eq!((first.computed, first.skipped), (3, 0));
    let summary = dir.join(SUMMARY_FILE);
    let bytes = std::fs::read(&summary).unwrap();
    // canonical order regardless of completion order
    let lambdas: Vec<f64> = first.records.iter().map(|r| r.lambda2).collect();
    assert_eq!(lambdas, vec![0.01, 0.05, 0.06]);
    assert_eq!(first.records[0].status, Status::NotYetDecohered);

    let again = run_sweep(&spec(&dir, grid.clone(), 1), Some(&cache)).unwrap();
    assert_eq!((again.computed, again.skipped), (0, 3));
    assert_eq!(std::fs::read(&summary).unwrap(), bytes, "rerun must leave the summary untouched");

    // interrupted appender: one record lost, the next cut mid-line
    let text = String::from_utf8(bytes.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let partial = format!("{}\n{}\n{}", lines[0], lines[1], &lines[3][..10]);
    std::fs::write(&summary, partial).unwrap();
    let resumed = run_sweep(&spec(&dir, grid, 1), Some(&cache)).unwrap();
    assert_eq!((resumed.computed, resumed.skipped), (2, 1));
    assert_eq!(std::fs::read(&summary).unwrap(), bytes, "resumed sweep must match the uninterrupted one");
}

#[test]
fn sweep_rejects_changed_base_and_short_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sweep");
    run_sweep(&spec(&dir, vec![(0.5, 0.0)], 1), Some(&tmp.path().join("cache"))).unwrap();
    assert!(dir.join(SWEEP_FILE).exists());
    let mut other = spec(&dir, vec![(0.5, 0.0)], 1);
    other.base.theta = 0.3;
    assert!(run_sweep(&other, None).is_err());
    let mut short = spec(&tmp.path().join("b"), vec![(0.5, 0.01)], 1);
    short.base.mode = RunMode::Full;
    assert!(run_sweep(&short, None).is_err());
    assert!(run_sweep(&spec(&tmp.path().join("c"), vec![], 1), None).is_err());
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::preset("fig1").unwrap();
    cfg.t_end = 12.0;
    cfg.out_dir = tmp.path().join("a");
    let first = run_simulation(&cfg, None).unwrap();
    let again = reproduce(&first.manifest_path, Some(&tmp.path().join("b")), None).unwrap();
    assert_eq!(again.raw.len(), first.raw.len());
    let tol = cfg.rtol * 10.0;
    for (x, y) in first.raw.samples.iter().zip(&again.raw.samples) {
        assert_eq!(x.0, y.0);
        for (a, b) in x.1.as_array().iter().zip(y.1.as_array()) {
            assert!((a - b).abs() <= tol * a.abs().max(1e-2), "t={}: {a} vs {b}", x.0);
        }
    }
    let m = Manifest::read(&again.manifest_path).unwrap();
    assert_eq!(m.config.get("output.dir").map(String::as_str), Some(tmp.path().join("b").to_str().unwrap()));
    let mut c1 = first.manifest.config.clone();
    let mut c2 = m.config.clone();
    c1.remove("output.dir");
    c2.remove("output.dir");
    assert_eq!(c1, c2);
    assert_eq!(m.summary.t1_fit, first.manifest.summary.t1_fit);
}

#[test]
fn plot_files_have_fixed_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::preset("fig1").unwrap();
    cfg.t_end = 20.0;
    cfg.out_dir = tmp.path().to_path_buf();
    let run = run_simulation(&cfg, None).unwrap();
    let plots = tmp.path().join("plots");
    let files = emit_plot_data(Figure::Fig1, run.manifest_path.parent().unwrap(), &plots).unwrap();
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,rho22,re_rho12,im_rho12,re_rho12_cg,im_rho12_cg,entropy_cg");
    assert!(text.lines().count() > 100);

    let sweep = tmp.path().join("sweep");
    let mut base = small_base();
    base.t_end = 1e3;
    run_sweep(
        &SweepSpec {
            grid: vec![(0.5, 0.05), (0.5, 0.06)],
            base,
            dir: sweep.clone(),
            workers: 1,
        },
        Some(&tmp.path().join("cache")),
    )
    .unwrap();
    for (fig, header) in [
        (Figure::Fig3a, "s,lambda2,omega_IQ,omega_IQ_adiabatic,omega_IQ_scaling_limit"),
        (Figure::Fig4, "s,lambda2,k"),
    ] {
        let files = emit_plot_data(fig, &sweep, &plots).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().next().unwrap(), header);
        assert_eq!(text.lines().count(), 3);
    }
    assert_eq!(read_summary(&sweep.join(SUMMARY_FILE)).unwrap().len(), 2);
    assert!(emit_plot_data(Figure::Fig2, &tmp.path().join("missing"), &plots).is_err());
}
