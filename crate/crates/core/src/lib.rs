//! Core numerics for nonlinear gas transport in fractured porous media.
//!
//! The crate covers the whole computational pipeline and nothing else:
//!
//! * [`linalg`]: CSR matrices, Gauss-Seidel sweeps, preconditioned conjugate
//!   gradients, dense symmetric eigensolvers and a dense Cholesky factorization.
//! * [`mesh`]: a structured triangulation of the unit square with fractures
//!   snapped onto mesh edges, plus the coarse quadrilateral cover with its
//!   bilinear partition of unity.
//! * [`physics`]: the Langmuir isotherm, the nonlinear storage and mobility
//!   coefficients of the matrix and fracture continua, and their constant
//!   upper bounds.
//! * [`assembly`]: P1 finite-element assembly of the coupled matrix/fracture
//!   system, the fixed linear operator `A = S_lin + tau * D_lin` and the
//!   explicit right-hand side.
//! * [`timestep`]: the linearly implicit scheme, the Picard-iterated fully
//!   implicit reference, the discrete energy and the splitting checks.
//! * [`precond`]: the adaptive spectral two-grid preconditioner.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line driver live in the `shalegas` crate.
#![no_std]
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(test, feature = "parallel"))]
extern crate std;

pub mod assembly;
pub mod linalg;
pub mod mesh;
pub mod physics;
pub mod precond;
pub mod timestep;

mod error;
mod math;

pub use error::Error;
