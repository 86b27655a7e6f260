//! Finite-volume simulation and regime classification for attraction-repulsion
//! chemotaxis systems with nonlinear diffusion, sensitivities and logistic
//! damping.

// Negated comparisons are how NaN gets rejected alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod model;
pub mod solver;
pub mod theory;
