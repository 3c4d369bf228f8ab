//! Normal-form games, setwise stability of faces, and regularized learning dynamics.

// `!(x > 0.0)` rejects NaN on purpose; indexed loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod builtin;
pub mod error;
pub mod faces;
pub mod game;
pub mod learning;
pub mod lp;
pub mod regularizer;
pub mod rng;

pub use error::{Error, Result};
