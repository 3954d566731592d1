//! Learning from weakly dependent time series: AC-X simulation, ERM over
//! parametric predictor classes, and generalization bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acx;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod erm;
pub mod error;
pub mod experiments;
pub mod hypothesis;
pub mod parallel;
pub mod rng;

pub use error::{Error, Result};
