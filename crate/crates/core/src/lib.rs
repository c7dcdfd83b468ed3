//! Divergences between sets of quantum states.
//!
//! The crate computes Umegaki, Petz, sandwiched, min-, max-, measured and
//! hypothesis-testing divergences between pairs of operators and between
//! convex sets of operators described by support-function oracles, together
//! with the finite-copy sandwich bounds on the regularized relative entropy,
//! Stein tables and resource-conversion rate intervals built from them.
//!
//! Logarithms are base two at every public boundary.

#![forbid(unsafe_code)]

pub mod divergences;
pub mod error;
pub mod hermitian;
pub mod measured;
pub mod optim;
pub mod sets;
pub mod setdiv;
pub mod aep;
pub mod stein;
pub mod tolerances;
pub mod random;
pub mod value;

pub use error::{Error, Result};
pub use hermitian::{DensityOperator, Hermitian, MatrixFn, Spectral, TraceMode};
pub use value::Value;
