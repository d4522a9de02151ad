//! Run configuration: flat `key = value` files with dotted keys.
//!
//! Layers apply in order, later ones winning: built-in defaults, a named
//! preset, the config file, then command-line overrides.

use crate::error::{config, HarnessError, Result};
use iqi_core::generator::{Averaging, Order};
use iqi_core::propagator::Tolerances;
use iqi_core::{Bath, Qubit};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Full generator on a uniform output grid.
    Full,
    /// Oscillation-averaged generator on a uniform output grid.
    Averaged,
    /// Long horizon on a geometric grid of coarse-graining windows.
    LongTime,
    /// Long horizon with ρ_cg frozen diagonal beyond T_IQ.
    Cutoff,
}

impl FromStr for RunMode {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(RunMode::Full),
            "averaged" => Ok(RunMode::Averaged),
            "long_time" | "long-time" => Ok(RunMode::LongTime),
            "cutoff" => Ok(RunMode::Cutoff),
            _ => Err(config(format!("unknown mode {s:?} (expected full, averaged, long_time or cutoff)"))),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Full => "full",
            RunMode::Averaged => "averaged",
            RunMode::LongTime => "long_time",
            RunMode::Cutoff => "cutoff",
        })
    }
}

impl RunMode {
    pub fn is_long(&self) -> bool {
        matches!(self, RunMode::LongTime | RunMode::Cutoff)
    }
}

fn averaging_name(a: Averaging) -> &'static str {
    match a {
        Averaging::RunningMean => "running_mean",
        Averaging::Secular => "secular",
    }
}

fn parse_averaging(s: &str) -> Result<Averaging> {
    match s {
        "running_mean" | "running-mean" => Ok(Averaging::RunningMean),
        "secular" => Ok(Averaging::Secular),
        _ => Err(config(format!("unknown averaging {s:?} (expected running_mean or secular)"))),
    }
}

/// Parse a real number; `pi`, `pi/16`, `3*pi` and `0.5*pi/4` are accepted.
pub fn parse_real(key: &str, text: &str) -> Result<f64> {
    let bad = || config(format!("{key}: cannot parse {text:?} as a number"));
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = text.trim();
    if rest.is_empty() {
        return Err(bad());
    }
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = rest[..end].trim();
        let x = if tok.eq_ignore_ascii_case("pi") {
            PI
        } else {
            tok.parse::<f64>().map_err(|_| bad())?
        };
        value = if divide { value / x } else { value * x };
        if end == rest.len() {
            break;
        }
        divide = &rest[end..end + 1] == "/";
        rest = &rest[end + 1..];
    }
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub delta: f64,
    pub theta: f64,
    pub s: f64,
    pub lambda2: f64,
    pub omega_c: f64,
    pub order: Order,
    pub mode: RunMode,
    pub averaging: Averaging,
    pub t_end: f64,
    /// Output spacing for the uniform-grid modes.
    pub dt: f64,
    pub rtol: f64,
    pub atol: f64,
    pub out_dir: PathBuf,
    pub name: String,
}

/// Every recognised key, in canonical order.
pub const KEYS: &[&str] = &[
    "qubit.delta",
    "qubit.theta",
    "bath.s",
    "bath.lambda2",
    "bath.omega_c",
    "run.order",
    "run.mode",
    "run.averaging",
    "run.t_end",
    "run.dt",
    "tol.rtol",
    "tol.atol",
    "output.dir",
    "output.name",
];

impl Default for RunConfig {
    fn default() -> Self {
        let tol = Tolerances::default();
        Self {
            delta: 1.0,
            theta: PI / 16.0,
            s: 0.72,
            lambda2: 0.05875,
            omega_c: 10.0,
            order: Order::Tcl4,
            mode: RunMode::Full,
            averaging: Averaging::RunningMean,
            t_end: 50.0,
            dt: 0.05,
            rtol: tol.rtol,
            atol: tol.atol,
            out_dir: PathBuf::from("runs"),
            name: "run".into(),
        }
    }
}

pub const PRESETS: &[&str] = &["fig1", "fig2"];

impl RunConfig {
    /// Named parameter sets of the two reference runs.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        match name {
            "fig1" => Ok(Self { name: "fig1".into(), ..base }),
            "fig2" => Ok(Self {
                s: 0.1,
                lambda2: 4.25e-4,
                mode: RunMode::LongTime,
                t_end: 2e6,
                name: "fig2".into(),
                ..base
            }),
            _ => Err(config(format!("unknown preset {name:?} (known: {})", PRESETS.join(", ")))),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let real = |v: &str| parse_real(key, v);
        match key {
            "qubit.delta" => self.delta = real(value)?,
            "qubit.theta" => self.theta = real(value)?,
            "bath.s" => self.s = real(value)?,
            "bath.lambda2" => self.lambda2 = real(value)?,
            "bath.omega_c" => self.omega_c = real(value)?,
            "run.order" => self.order = value.parse().map_err(|_| config(format!("run.order: expected 2 or 4, got {value:?}")))?,
            "run.mode" => self.mode = value.parse()?,
            "run.averaging" => self.averaging = parse_averaging(value)?,
            "run.t_end" => self.t_end = real(value)?,
            "run.dt" => self.dt = real(value)?,
            "tol.rtol" => self.rtol = real(value)?,
            "tol.atol" => self.atol = real(value)?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "output.name" => {
                if value.is_empty() || value.contains(['/', '\\']) {
                    return Err(config(format!("output.name: {value:?} is not a plain file stem")));
                }
                self.name = value.to_string()
            }
            _ => return Err(config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Apply a `key = value` assignment as written on the command line.
    pub fn set_assignment(&mut self, text: &str) -> Result<()> {
        let (k, v) = text.split_once('=').ok_or_else(|| config(format!("expected key=value, got {text:?}")))?;
        self.set(k.trim(), v)
    }

    /// Apply a config file's contents. `#` starts a comment; a key may appear once.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| config(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if let Some(prev) = seen.insert(k.to_string(), n + 1) {
                return Err(config(format!("line {}: {k} already set on line {prev}", n + 1)));
            }
            self.set(k, v).map_err(|e| config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.apply_text(&text)
    }

    /// Canonical key/value pairs; floats use the shortest exact representation.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("qubit.delta", format!("{:?}", self.delta));
        put("qubit.theta", format!("{:?}", self.theta));
        put("bath.s", format!("{:?}", self.s));
        put("bath.lambda2", format!("{:?}", self.lambda2));
        put("bath.omega_c", format!("{:?}", self.omega_c));
        put("run.order", if self.order == Order::Tcl2 { "2" } else { "4" }.into());
        put("run.mode", self.mode.to_string());
        put("run.averaging", averaging_name(self.averaging).into());
        put("run.t_end", format!("{:?}", self.t_end));
        put("run.dt", format!("{:?}", self.dt));
        put("tol.rtol", format!("{:?}", self.rtol));
        put("tol.atol", format!("{:?}", self.atol));
        put("output.dir", self.out_dir.display().to_string());
        put("output.name", self.name.clone());
        m
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// Config-file rendering of [`to_pairs`](Self::to_pairs), keys in canonical order.
    pub fn to_text(&self) -> String {
        let pairs = self.to_pairs();
        KEYS.iter().map(|k| format!("{k} = {}\n", pairs[*k])).collect()
    }

    pub fn qubit(&self) -> Result<Qubit> {
        Ok(Qubit::new(self.delta, self.theta)?)
    }

    pub fn bath(&self) -> Result<Bath> {
        Ok(Bath::new(self.lambda2, self.s, self.omega_c)?)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            ..Tolerances::default()
        }
    }

    /// Coarse-graining window: one free period.
    pub fn window(&self) -> f64 {
        2.0 * PI / self.delta
    }

    /// Check everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        self.qubit()?;
        let bath = self.bath()?;
        if !bath.is_sub_ohmic() && self.lambda2 > 0.0 {
            return Err(config(format!("bath.s = {} is not sub-Ohmic; the generator tables need s < 1", self.s)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(config(format!("run.t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt > 0.0 && self.dt < self.t_end) {
            return Err(config(format!("run.dt must lie in (0, t_end), got {}", self.dt)));
        }
        if self.mode.is_long() && self.t_end < 1e3 {
            return Err(config(format!("mode {} needs run.t_end ≥ 1e3, got {}", self.mode, self.t_end)));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(config("tolerances must be positive"));
        }
        Ok(())
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out_dir.join(&self.name)
    }
}
