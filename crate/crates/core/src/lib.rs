//! Spectral asymptotics of Hankel operators with entries or kernels decaying
//! like `j^{-1} (log j)^{-α}`.
//!
//! The crate builds truncated Hankel matrices and Nyström discretizations of
//! integral Hankel operators, computes their extreme eigenvalues with a
//! thick-restart Lanczos solver over an FFT-based matrix-vector product, and
//! compares the computed spectra with closed-form leading coefficients.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod eigensolve;
pub mod error;
pub mod hankel;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod quadrature;
pub mod report;
pub mod sequences;
pub mod special;
pub mod symbols;

pub use error::{Error, Result};
pub use model::{AsymptoticPrediction, ContinuousKernelSpec, DiscreteSymbolSpec};
pub use par::Parallelism;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
