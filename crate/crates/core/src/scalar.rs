//! The real scalar type every algorithm in this crate is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar: `f32` or `f64`.
///
/// The associated tolerances are absolute and scaled to the precision of the
/// type; the `f64` values are the ones the crate is specified and tested
/// against.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Coefficients at or below this magnitude are trimmed from the tail of a
    /// polynomial.
    const TRIM_EPS: f64;
    /// A root with modulus `>= 1 - STAB_EPS` is treated as unstable.
    const STAB_EPS: f64;
    /// Maximum acceptable residual of a polynomial identity after synthesis.
    const RESIDUAL_TOL: f64;
    /// The leading coefficient of `H(z⁻¹)` must exceed this in magnitude.
    const GAIN_EPS: f64;

    /// Converts an `f64` literal. Total for every implementor.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Scalar for f64 {
    const TRIM_EPS: f64 = 1e-12;
    const STAB_EPS: f64 = 1e-9;
    const RESIDUAL_TOL: f64 = 1e-9;
    const GAIN_EPS: f64 = 1e-8;
}

impl Scalar for f32 {
    const TRIM_EPS: f64 = 1e-6;
    const STAB_EPS: f64 = 1e-5;
    const RESIDUAL_TOL: f64 = 1e-3;
    const GAIN_EPS: f64 = 1e-6;
}
