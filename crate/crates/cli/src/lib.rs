//! Experiment orchestration for `rlgames`: configuration files, runs and batches
//! over initialization grids, CSV/JSON output and the acceptance suite.

// `!(x > 0.0)` rejects NaN on purpose; indexed loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;
