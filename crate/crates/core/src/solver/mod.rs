//! Sparse direct solves, static condensation, Newton and the time-stepping drivers.

mod condense;
mod drive;
mod newton;
mod sparse;

pub use condense::{condense, CondensedSystem};
pub use drive::{stationary_solve, transient_drive, DriveOutput, StepInfo};
pub use newton::{newton_solve, NewtonProblem, NewtonReport, ABSOLUTE_FLOOR, MAX_BACKTRACKS};
pub use sparse::{relative_residual, sparse_solve, CsrMatrix, Factorization, Triplets, RESIDUAL_TOL};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("linear solve residual {residual:e} exceeds tolerance")]
    Inaccurate { residual: f64 },
    #[error("zero or non-finite diagonal entry in the cell block at cell {0}")]
    ZeroCellDiagonal(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Newton did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton iterate could not be kept strictly positive")]
    InadmissibleIterate,
    #[error("time step fell below {min_dt:e} at t = {time}")]
    TimeStepUnderflow { time: f64, min_dt: f64 },
}
