//! Zeroth-order gradient estimators, projected zeroth-order descent and
//! Monte Carlo audits of their differential-privacy behavior.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod cli;
pub mod descent;
pub mod error;
pub mod estimators;
pub mod losses;
pub mod stream;
pub mod theory;

pub use error::{Error, Result};
