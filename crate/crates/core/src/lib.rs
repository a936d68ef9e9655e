// Index loops over several same-length arrays read better than zipped
// iterator chains in the numerical kernels.
#![allow(clippy::needless_range_loop)]

//! Sparse block-system solvers for monolithic fluid-structure interaction.
//!
//! The crate provides:
//!
//! * CSR sparse kernels (`sparse`), dense LU oracles (`dense`), 3x3 block
//!   assembly (`block`) and Matrix Market I/O (`matrix_market`);
//! * right-preconditioned GMRES and flexible GMRES (`krylov`);
//! * approximate block inverses: exact LU, stationary sweeps, ILU(0),
//!   aggregation AMG V-cycles and inner GMRES (`inner`);
//! * the block-LDU preconditioner with an explicitly constructed fluid
//!   Schur complement, plus dense reference factorizations and five
//!   classical block preconditioners (`ldu`, `baseline`);
//! * a desk-scale 2D FSI model-problem generator with density, mesh and
//!   time-step sweeps (`problem`) and Matrix Market export (`export`).

pub mod baseline;
pub mod block;
pub mod dense;
pub mod error;
pub mod export;
pub mod inner;
pub mod krylov;
pub mod ldu;
pub mod matrix_market;
pub mod problem;
pub mod rng;
pub mod sparse;
pub mod system;

#[cfg(test)]
pub(crate) mod testutil;

pub use block::BlockMatrix3x3;
pub use error::{Error, Result};
pub use krylov::{fgmres, gmres, KrylovConfig, LinearOperator, SolveReport};
pub use sparse::SparseMatrix;
pub use system::FsiBlockSystem;
