//! Sparse recovery with mismatched operators.
//!
//! Signals are encoded with one matrix `A` and decoded with another, `Φ`.
//! This crate provides the two recovery algorithms (CoSaMP and basis
//! pursuit denoising), the restricted isometry and perturbation constants
//! that govern their stability, evaluators for the corresponding
//! sufficient conditions and error bounds, and a seeded experiment harness
//! that checks those bounds empirically.
//!
//! Everything works on small dense real matrices. Subset enumeration and
//! experiment sweeps run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise; results are
//! bit-identical either way.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bpdn;
pub mod cosamp;
pub mod ensembles;
mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, IndexSet, SignalVector};
