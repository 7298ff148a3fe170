//! Simulation toolkit for recovering structured signals from non-linear observations
//! with the generalized Lasso.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`]: signal classes, measurement ensembles, observation models, constraint
//!   sets, corruption specifications and target maps.
//! * [`geometry`]: Euclidean projections and support functions of the constraint sets.
//! * [`observe`]: observation generators and adversarial corruption.
//! * [`solver`]: projected gradient descent for `min_{z∈K} (1/m)‖y − Az‖₂²`.
//! * [`analysis`]: target scalars, target mismatch, mean widths, outlier norms and rate fits.
//! * [`harness`]: JSON-configured experiments, CSV output and the `nlcs` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod observe;
pub mod seed;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::Matrix;
