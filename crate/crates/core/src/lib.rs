//! Stochastic SIS logistic epidemic: exact extinction-time analytics,
//! event-driven simulation, coupling constructions and Monte Carlo
//! validation against the Gumbel limit.

// Dense numeric kernels index several arrays in step, and `!(x >= 0.0)`
// deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod mc;
pub mod model;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
