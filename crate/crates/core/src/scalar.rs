//! Scalar abstraction for the closed-form layer.
//!
//! Spectral density, correlation function, Gamma and the coupling matrix are
//! written once over [`Real`]; the quadrature, table and integrator layers are
//! pinned to `f64` because their tolerances are.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossless for literals we actually use; panics only on NaN-producing casts.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
