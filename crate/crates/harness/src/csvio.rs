//! CSV schemas. Floats are written with 17 significant digits, which is
//! enough for every f64 to survive a write/read cycle unchanged.

use crate::error::{HarnessError, Result};
use iqi_core::analysis::entropy;
use iqi_core::propagator::Trajectory;
use iqi_core::qubit::QubitState;
use std::fs::File;
use std::io::Write;
use std::path::Path;

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "rho22", "re_rho12", "im_rho12"];
pub const COARSE_HEADER: [&str; 7] = ["t", "rho22", "re_rho12", "im_rho12", "re_rho12_cg", "im_rho12_cg", "entropy_cg"];
pub const SUMMARY_HEADER: [&str; 7] = ["s", "lambda2", "status", "T_IQ", "omega_IQ", "k", "T1_fit"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let got = r.headers().map_err(csv_err(path))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(HarnessError::Malformed {
            path: path.to_path_buf(),
            row: 0,
            reason: format!("header {:?}, expected {:?}", got.iter().collect::<Vec<_>>().join(","), header.join(",")),
        });
    }
    Ok(r)
}

fn parse_field(path: &Path, row: usize, rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let bad = |reason: String| HarnessError::Malformed {
        path: path.to_path_buf(),
        row,
        reason,
    };
    let f = rec.get(i).ok_or_else(|| bad(format!("missing column {i}")))?;
    f.parse().map_err(|_| bad(format!("column {i}: {f:?} is not a number")))
}

fn parse_opt(path: &Path, row: usize, rec: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    if rec.get(i).is_some_and(str::is_empty) {
        return Ok(None);
    }
    parse_field(path, row, rec, i).map(Some)
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err(path))?;
    for (t, x) in &traj.samples {
        w.write_record([fmt_f64(*t), fmt_f64(x.rho22), fmt_f64(x.re_rho12), fmt_f64(x.im_rho12)])
            .map_err(csv_err(path))?;
    }
    finish(w, path)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let mut r = reader(path, &TRAJECTORY_HEADER)?;
    let mut samples = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let v: Vec<f64> = (0..4).map(|i| parse_field(path, n + 1, &rec, i)).collect::<Result<_>>()?;
        samples.push((v[0], QubitState::new(v[1], v[2], v[3])));
    }
    Ok(Trajectory::from_samples(samples)?)
}

/// Raw state at `t`: the sample itself, or linear interpolation between neighbours.
fn raw_at(raw: &Trajectory, t: f64) -> QubitState {
    let s = &raw.samples;
    let j = s.partition_point(|x| x.0 < t).min(s.len() - 1);
    if s[j].0 == t || j == 0 {
        return s[j].1;
    }
    let (a, b) = (&s[j - 1], &s[j]);
    let f = (t - a.0) / (b.0 - a.0);
    let (xa, xb) = (a.1.as_array(), b.1.as_array());
    QubitState::from_array(std::array::from_fn(|c| xa[c] + f * (xb[c] - xa[c])))
}

/// One row per coarse-grained sample: the raw state at that time, the
/// coarse-grained coherence and the entropy of the coarse-grained state
/// (NaN where the state is not positive).
pub fn write_coarse(path: &Path, raw: &Trajectory, cg: &Trajectory) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(COARSE_HEADER).map_err(csv_err(path))?;
    for (t, c) in &cg.samples {
        let x = if raw.is_empty() { *c } else { raw_at(raw, *t) };
        let sigma = entropy(c).unwrap_or(f64::NAN);
        w.write_record([t, &x.rho22, &x.re_rho12, &x.im_rho12, &c.re_rho12, &c.im_rho12, &sigma].map(|v| fmt_f64(*v)))
            .map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// Rows of a coarse-grained file.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseRow {
    pub t: f64,
    pub raw: QubitState,
    pub re_cg: f64,
    pub im_cg: f64,
    pub entropy: f64,
}

impl CoarseRow {
    /// Coarse-grained state; the file keeps only the raw population.
    pub fn cg_state(&self) -> QubitState {
        QubitState::new(self.raw.rho22, self.re_cg, self.im_cg)
    }
}

pub fn read_coarse(path: &Path) -> Result<Vec<CoarseRow>> {
    let mut r = reader(path, &COARSE_HEADER)?;
    let mut out = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let v: Vec<f64> = (0..7).map(|i| parse_field(path, n + 1, &rec, i)).collect::<Result<_>>()?;
        out.push(CoarseRow {
            t: v[0],
            raw: QubitState::new(v[1], v[2], v[3]),
            re_cg: v[4],
            im_cg: v[5],
            entropy: v[6],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Decohered,
    NotYetDecohered,
    Failed,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Decohered => "decohered",
            Status::NotYetDecohered => "not_yet_decohered",
            Status::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Status::Decohered, Status::NotYetDecohered, Status::Failed]
            .into_iter()
            .find(|x| x.as_str() == s)
    }
}

/// One line of a sweep summary. Absent values are empty fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub s: f64,
    pub lambda2: f64,
    pub status: Status,
    pub t_iq: Option<f64>,
    pub omega_iq: Option<f64>,
    pub k: Option<f64>,
    pub t1_fit: Option<f64>,
}

impl SweepRecord {
    pub fn failed(s: f64, lambda2: f64) -> Self {
        Self {
            s,
            lambda2,
            status: Status::Failed,
            t_iq: None,
            omega_iq: None,
            k: None,
            t1_fit: None,
        }
    }

    pub fn fields(&self) -> [String; 7] {
        [
            fmt_f64(self.s),
            fmt_f64(self.lambda2),
            self.status.as_str().to_string(),
            fmt_opt(self.t_iq),
            fmt_opt(self.omega_iq),
            fmt_opt(self.k),
            fmt_opt(self.t1_fit),
        ]
    }

    /// Same grid point, compared exactly.
    pub fn same_point(&self, s: f64, lambda2: f64) -> bool {
        self.s == s && self.lambda2 == lambda2
    }
}

/// The summary line for a record, newline-terminated, as the appender writes it.
pub fn summary_line(rec: &SweepRecord) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(rec.fields()).map_err(|source| HarnessError::Csv {
        path: "<memory>".into(),
        source,
    })?;
    w.into_inner().map_err(|e| HarnessError::io("<memory>", e.into_error()))
}

pub fn summary_header_line() -> String {
    SUMMARY_HEADER.join(",") + "\n"
}

pub fn read_summary(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut r = reader(path, &SUMMARY_HEADER)?;
    let mut out = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let row = n + 1;
        let status = rec.get(2).and_then(Status::parse).ok_or_else(|| HarnessError::Malformed {
            path: path.to_path_buf(),
            row,
            reason: format!("unknown status {:?}", rec.get(2).unwrap_or("")),
        })?;
        out.push(SweepRecord {
            s: parse_field(path, row, &rec, 0)?,
            lambda2: parse_field(path, row, &rec, 1)?,
            status,
            t_iq: parse_opt(path, row, &rec, 3)?,
            omega_iq: parse_opt(path, row, &rec, 4)?,
            k: parse_opt(path, row, &rec, 5)?,
            t1_fit: parse_opt(path, row, &rec, 6)?,
        });
    }
    Ok(out)
}

/// Write a complete summary (header plus records) atomically.
pub fn write_summary(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = File::create(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
        f.write_all(summary_header_line().as_bytes()).map_err(|e| HarnessError::io(&tmp, e))?;
        for r in records {
            f.write_all(&summary_line(r)?).map_err(|e| HarnessError::io(&tmp, e))?;
        }
        f.sync_all().map_err(|e| HarnessError::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1.09e6, f64::MIN_POSITIVE, 0.0, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn status_strings() {
        for s in [Status::Decohered, Status::NotYetDecohered, Status::Failed] {
            assert_eq!(Status::parse(s.as_str()), Some(s));
        }
        assert_eq!(Status::parse("ok"), None);
    }

    #[test]
    fn interpolates_raw_between_samples() {
        let raw = Trajectory::from_samples(vec![(0.0, QubitState::new(1.0, 0.0, 0.0)), (2.0, QubitState::new(0.0, 0.2, -0.2))]).unwrap();
        let x = raw_at(&raw, 0.5);
        assert_eq!(x.as_array(), [0.75, 0.05, -0.05]);
        assert_eq!(raw_at(&raw, 2.0).rho22, 0.0);
    }
}
