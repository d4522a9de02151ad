use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const COARSE_FILE: &str = "coarse.csv";

/// Everything needed to reproduce and interpret a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Canonical `key = value` pairs of the run configuration.
    pub config: BTreeMap<String, String>,
    /// "ok" or "failed".
    pub status: String,
    pub error: Option<String>,
    pub started_unix: u64,
    pub wall_time_s: f64,
    /// Generator-table cache outcome: disabled, hit or miss.
    pub cache: String,
    pub files: Files,
    pub propagation: Option<Propagation>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Files {
    pub trajectory: Option<String>,
    pub coarse: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub generator: String,
    pub rtol: f64,
    pub atol: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evaluations: u64,
    pub h_min: f64,
    pub h_max: f64,
    pub samples: usize,
    pub positivity_violations: usize,
    /// The state left the physical neighbourhood here and integration stopped.
    pub escaped_at: Option<f64>,
}

/// Fit and analysis results; `None` where not applicable or not obtainable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub t1_golden_rule: Option<f64>,
    pub t1_fit: Option<f64>,
    pub rho22_plateau_fit: Option<f64>,
    pub rho22_second_order: Option<f64>,
    pub re_rho12_second_order: Option<f64>,
    /// "decohered", "not_yet_decohered" or absent when no coarse-grained data.
    pub decoherence: Option<String>,
    pub t_iq: Option<f64>,
    pub omega_iq: Option<f64>,
    pub im_crossing: Option<f64>,
    pub cutoff: Option<f64>,
    pub envelope_k: Option<f64>,
    pub envelope_c: Option<f64>,
    pub envelope_window: Option<[f64; 2]>,
    pub amplitude_ratio_at_t_iq: Option<f64>,
    pub adiabatic_t_iq: Option<f64>,
    pub adiabatic_t_iq_scaling: Option<f64>,
    /// Analysis steps that could not be completed, with reasons.
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Write via a temporary file and rename.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text + "\n").map_err(|e| HarnessError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}
