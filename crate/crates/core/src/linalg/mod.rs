//! Linear algebra backends for graph Laplacians: dense Cholesky, sparse
//! Cholesky (faer), Jacobi-preconditioned conjugate gradients, and the
//! sine-transform diagonalization of Dirichlet lattice boxes.

mod box_green;
mod cg;
mod dense;
mod sparse;
mod spectral;
mod system;

use thiserror::Error;

pub use box_green::BoxGreenTable;
pub use cg::{conjugate_gradient, CgOutcome, CgSettings};
pub use dense::{Cholesky, SymmetricMatrix};
pub use sparse::SparseCholesky;
pub use spectral::{BoxSpectral, Window};
pub use system::{cached_solver, clear_solver_cache, LaplacianSolver, RestrictedIndex, DENSE_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("conjugate gradients stalled after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("sparse factorization failed: {0}")]
    Sparse(String),
    #[error("system has no unknowns")]
    Empty,
}
