//! Identification of two-dimensional spectral submanifolds (SSMs) and their
//! backbone curves from sampled decaying vibration signals.
//!
//! The pipeline shifts the signals to their equilibrium, delay-embeds them,
//! fits a polynomial sampling map, diagonalizes its linear part, solves the
//! invariance equations of the slowest SSMs and reads off backbone curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backbone;
pub mod benchkit;
pub mod error;
pub mod pipeline;
pub mod polyfit;
pub mod signal_io;
pub mod spectral;
pub mod ssm;

pub use error::{Error, ErrorKind, Result};
