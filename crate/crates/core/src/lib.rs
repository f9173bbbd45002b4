//! Weighted likelihood estimation with residual-driven weights.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod models;
pub mod residuals;
pub mod solver;
pub mod special;
pub mod weights;

pub use error::{Result, WleError};
