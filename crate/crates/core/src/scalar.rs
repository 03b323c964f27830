use std::fmt;

use num_traits::{Float, NumAssign};

/// Scalar types the numerics are generic over.
///
/// Everything downstream (decompositions, order checks, solvers, generators)
/// is written against this trait; `f64` is the supported default and the only
/// type the documented tolerance defaults are calibrated for. `f32` works but
/// needs caller-supplied tolerances roughly `1e7` looser.
pub trait Real: Float + NumAssign + fmt::Debug + fmt::Display {}

impl<T> Real for T where T: Float + NumAssign + fmt::Debug + fmt::Display {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the constant is not representable at all (e.g. overflow to
/// infinity on `f32`), which for the in-crate constants cannot happen.
pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from(x).expect("constant must be representable in the scalar type")
}

/// Lossy view of a generic scalar as `f64`, for error messages and reports.
pub(crate) fn as_f64<F: Real>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
