//! Configuration, run orchestration, sweeps and plot-data emission on top of
//! `iqi-core`; the `iqi` binary is a thin CLI over this library.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod plots;
pub mod run;
pub mod sweep;

pub use config::{RunConfig, RunMode};
pub use error::{HarnessError, Result};
pub use run::{reproduce, run_simulation, RunOutput};
pub use sweep::{run_sweep, SweepOutcome, SweepSpec};
