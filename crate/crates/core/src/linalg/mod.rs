//! Dense and sparse linear-algebra kernels.

mod cholesky;
mod dense;
mod eigen;
mod pcg;
mod smoother;
mod sparse;

pub use cholesky::CholeskyFactor;
pub use dense::{DenseMatrix, DenseSymmetricMatrix};
pub use eigen::{
    generalized_eig_diag, generalized_eig_diag_lowest, sym_eig_jacobi, sym_eig_lowest,
    sym_eigenvalues, EigenMethod, SymmetricEigen,
};
pub use pcg::{pcg_solve, pcg_solve_from, IdentityPreconditioner, JacobiPreconditioner, Preconditioner, SolveReport};
pub use smoother::{gauss_seidel_sweep, GaussSeidel, SweepDirection};
pub use sparse::CsrMatrix;

use thiserror::Error;

/// Relative tolerance used when checking that a matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) is outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("diagonal entry of row {row} is missing or not positive")]
    ZeroDiagonal { row: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("CG breakdown at iteration {iteration}: p^T A p = {curvature:e}, matrix is not SPD")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("preconditioner is not positive definite at iteration {iteration} (r^T z = {value:e})")]
    IndefinitePreconditioner { iteration: usize, value: f64 },
    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("non-positive pivot {pivot:e} at index {index}: matrix is not SPD (rank-deficient coarse space?)")]
    NonPositivePivot { index: usize, pivot: f64 },
    #[error("scaling entry {index} is not strictly positive ({value:e})")]
    NonPositiveScaling { index: usize, value: f64 },
    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
}
