//! Experiment runner for the syndrome-coding library: TOML configs, text
//! file formats, CSV output and a rayon-backed trial runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod formats;
pub mod harness;
pub mod parallel;

mod error;

pub use error::{LabError, Result};
