//! KL and Chernoff divergence metrics for Laplace-mechanism privacy analysis.
//!
//! Each module is usable on its own: densities and sampling, quadrature and
//! one-dimensional optimization, divergences, bounds derived from the pure
//! DP level, the mechanism and attack model, and a Monte Carlo classifier
//! for measuring empirical error exponents.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod distributions;
pub mod divergences;
pub mod dp_bounds;
pub mod error;
pub mod mechanism;
pub mod numeric;

pub use error::{Error, Result};
