//! The `iqi` binary: exit codes, configuration layering and output files.

use std::path::Path;
use std::process::{Command, Output};

fn iqi(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iqi")).args(args).env("IQI_CACHE_DIR", cache).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn help_and_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&iqi(&["--help"], tmp.path())), 0);
    assert_eq!(code(&iqi(&["simulate", "--help"], tmp.path())), 0);
    assert_eq!(code(&iqi(&["frobnicate"], tmp.path())), 1);
    assert_eq!(code(&iqi(&["simulate", "--no-such-flag"], tmp.path())), 1);
}

#[test]
fn invalid_configuration_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    for bad in [
        vec!["simulate", "--mode", "sideways", "--out", out],
        vec!["simulate", "--s", "1.5", "--out", out],
        vec!["simulate", "--lambda2", "-0.1", "--out", out],
        vec!["simulate", "--set", "bath.colour=blue", "--out", out],
        vec!["simulate", "--preset", "fig9", "--out", out],
        vec!["simulate", "--mode", "long_time", "--t-end", "10", "--out", out],
    ] {
        let o = iqi(&bad, tmp.path());
        assert_eq!(code(&o), 1, "{bad:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let cfg = tmp.path().join("bad.conf");
    std::fs::write(&cfg, "bath.s = 0.5\nbath.s = 0.6\n").unwrap();
    assert_eq!(code(&iqi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out], tmp.path())), 1);
}

#[test]
fn numerical_failure_exits_2_and_records_it() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = iqi(
        &[
            "simulate",
            "--t-end",
            "2",
            "--set",
            "tol.rtol=1e-300",
            "--set",
            "tol.atol=1e-300",
            "--out",
            out,
            "--name",
            "x",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let m = std::fs::read_to_string(tmp.path().join("x/manifest.json")).unwrap();
    assert!(m.contains("\"status\": \"failed\""));
}

#[test]
fn flags_override_config_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# uncoupled reference\nbath.lambda2 = 0.3\nrun.t_end = 4\nrun.dt = pi/8\noutput.name = from_file\n",
    )
    .unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = iqi(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--lambda2",
            "0",
            "--name",
            "flagged",
            "--out",
            out,
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("flagged");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["bath.lambda2"], "0.0");
    assert_eq!(m["config"]["run.t_end"], "4.0");
    assert_eq!(m["status"], "ok");

    let traj = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), "t,rho22,re_rho12,im_rho12");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    // t = 0, π/8, …, 4 (the endpoint is always sampled)
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert_eq!(r[1], 1.0, "uncoupled excited state keeps its population");
        assert_eq!((r[2], r[3]), (0.0, 0.0));
    }
    let coarse = std::fs::read_to_string(dir.join("coarse.csv")).unwrap_or_default();
    if !coarse.is_empty() {
        assert_eq!(coarse.lines().next().unwrap(), "t,rho22,re_rho12,im_rho12,re_rho12_cg,im_rho12_cg,entropy_cg");
    }
}

#[test]
fn adiabatic_and_physical_estimate_print_values() {
    let tmp = tempfile::tempdir().unwrap();
    let o = iqi(&["adiabatic", "--preset", "fig2"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stdout.is_empty());
    let o = iqi(&["physical-estimate", "--s", "0.5", "--lambda2", "1e-3", "--delta-hz", "1e9"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    let hz: f64 = text
        .lines()
        .find(|l| l.starts_with("omega_IQ [Hz]"))
        .unwrap()
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert!(hz > 1e-2 && hz < 1e1, "{hz}");
}
