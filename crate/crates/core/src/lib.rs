//! Numerical laboratory for the boundary behavior of degenerate
//! Black-Scholes-type equations `u_t = sum a_ij u_{x_i x_j}` on the positive
//! orthant, with diffusions absorbed at zero.
//!
//! The main entry points:
//! - [`models`]: CEV/GBM/tabulated coefficients, payoffs, hypothesis checks.
//! - [`oracles`]: closed-form prices and boundary deltas.
//! - [`pde`]: theta-scheme solvers in 1D and on 2D faces-then-interior.
//! - [`boundary`]: extraction of `u_x(0, t)` and the regime classification.
//! - [`barrier`]: sampled certificates for the comparison functions.
//! - [`mc`]: absorbed Monte Carlo paths as an independent pricing oracle.
//! - [`runner`]: config-driven experiments with CSV reports.

pub mod barrier;
pub mod boundary;
pub mod error;
pub mod mc;
pub mod models;
pub mod oracles;
pub mod pde;
pub mod runner;

pub use error::{LabError, Result};
