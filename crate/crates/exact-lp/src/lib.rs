//! Exact linear programming over the rationals.
//!
//! Problems are in standard form `min c·x, A x = b, x ≥ 0`. The exact solver
//! returns a primal optimum, the simplex multipliers as a dual optimum, and
//! the optimal basis; [`verify_solution`] re-derives every optimality
//! condition independently of the solver. A separately written `f64` simplex
//! ([`float`]) is available for screening.

mod basis;
mod fraction;
pub mod float;
mod problem;
mod simplex;
mod verify;

pub use basis::{basic_solution, BasicSolution};
pub use fraction::{Fraction, ParseFractionError};
pub use problem::{LpProblem, LpSolution, LpStatus, SparseColumns};
pub use simplex::{solve, solve_with, PivotRule, SolveOptions};
pub use verify::verify_solution;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("A is {rows}x{cols} but b has {b} entries and c has {c}")]
    DimensionMismatch { rows: usize, cols: usize, b: usize, c: usize },
    #[error("solution has x of length {x} and y of length {y} for a {rows}x{cols} problem")]
    SolutionShape { rows: usize, cols: usize, x: usize, y: usize },
}
