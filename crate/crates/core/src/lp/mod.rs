//! Bounded-variable linear programming.
//!
//! Problems are `min c'x` subject to `A x = b` and `lo <= x <= hi`, with
//! infinite bounds allowed. The solver is a two-phase revised simplex over
//! a sparse LU basis factorization.

mod dump;
pub(crate) mod lu;
mod problem;
mod simplex;

pub use dump::write_dump;
pub use problem::{Basis, CscMatrix, LpBuilder, LpProblem, LpSolution, LpStatus};
pub use simplex::{solve, solve_with, SimplexOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Construction(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
}

#[cfg(test)]
mod tests;
