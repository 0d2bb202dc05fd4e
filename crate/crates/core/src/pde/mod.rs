//! Finite-difference solvers for the driftless equation `u_t = sum a_ii u_{x_i x_i}`.

pub mod grid;
pub mod refine;
pub mod solve1d;
pub mod solve2d;
mod tridiag;

pub use grid::{build_grid, Grid1D, TimeGrid};
pub use refine::{refine_study, ConvergenceTable, Oracle, RefineLevel, RefineProblem};
pub use solve1d::{solve_1d, solve_1d_with_lower_order, Diagnostics, FarField, Scheme, Solution1D};
pub use solve2d::{solve_2d_with_faces, Solution2D};
pub use tridiag::solve_tridiagonal;
