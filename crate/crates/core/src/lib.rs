//! Numerical laboratory for operator order relations on positive definite
//! matrices: Loewner and chaotic order predicates, a family of order-preserving
//! power inequalities, and solvers that construct the contraction solving each
//! inequality's characterizing operator equation.
//!
//! The numerics are generic over the scalar type (any [`scalar::Real`], i.e.
//! `f32` or `f64`); the aliases at the crate root fix the `f64` instantiation
//! the documented tolerances are calibrated for.

pub mod equations;
pub mod error;
pub mod furuta;
pub mod genpairs;
pub mod harness;
pub mod orders;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` symmetric matrix, the workhorse type.
pub type Mat64 = spectra::HermitianMatrix<f64>;
/// `f32` symmetric matrix, for reduced-precision experiments.
pub type Mat32 = spectra::HermitianMatrix<f32>;
/// `f64` eigensystem.
pub type Spectral64 = spectra::SpectralDecomposition<f64>;
/// `f64` tolerance policy.
pub type Tolerance64 = orders::TolerancePolicy<f64>;
/// `f64` order verdict.
pub type Verdict64 = orders::OrderVerdict<f64>;
/// `f64` generator spec.
pub type GenSpec64 = genpairs::GenSpec<f64>;
/// `f64` inequality parameter set.
pub type Params64 = furuta::ParamSet<f64>;
/// `f64` inequality evaluation.
pub type Evaluation64 = furuta::Evaluation<f64>;
