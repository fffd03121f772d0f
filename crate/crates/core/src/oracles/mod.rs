//! Independent numerical ground truth.
//!
//! These routines deliberately use different numerics from the closed forms
//! they check: Simpson quadrature against analytic antiderivatives, finite
//! differences against Riccati solutions, and a tridiagonal BVP solve
//! against the closed-form static schedule.

mod bvp;
mod quadrature;
mod residual;

pub use bvp::{solve_tridiagonal, BvpProblem, BvpSolution};
pub use quadrature::{integrate, quadrature, QuadTolerance, MAX_INTERVALS};
pub use residual::{central_residual, max_abs};
