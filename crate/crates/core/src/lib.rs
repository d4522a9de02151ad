//! Perturbative time-convolutionless (TCL2/TCL4) dynamics of a qubit coupled
//! to a zero-temperature sub-Ohmic boson bath, and the analysis of its
//! long-time coherence decay.
//!
//! The closed-form layer ([`bath::BathSpec`], [`qubit::QubitSpec`], spectral
//! density, correlation function, Γ, c_s, coupling matrix) is generic over
//! [`Real`]; quadrature, tables and time integration run in `f64`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bath;
pub mod cache;
pub mod chebyshev;
pub mod cumulant;
pub mod error;
pub mod fit;
pub mod gamma;
pub mod generator;
pub mod kernel;
pub mod propagator;
pub mod quadrature;
pub mod qubit;
pub mod scalar;
pub mod superop;

pub use error::{Error, Result};
pub use scalar::Real;

/// Bath parameters in double precision.
pub type Bath = bath::BathSpec<f64>;
/// Qubit parameters in double precision.
pub type Qubit = qubit::QubitSpec<f64>;
