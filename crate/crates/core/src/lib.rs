//! Low-rank representation subspace clustering with weighted nuclear norm
//! regularization.
//!
//! The crate is organized bottom-up:
//!
//! * [`prox`]: shrinkage operators (soft thresholding, singular value
//!   thresholding and its weighted and partial-sum variants, column-wise
//!   ℓ2,1 shrinkage).
//! * [`solvers`]: ADMM and linearized ADMM for the weighted model, plus the
//!   nuclear-norm and partial-sum baselines.
//! * [`spectral`]: affinity construction, normalized Laplacian embedding and
//!   deterministically seeded k-means.
//! * [`eval`]: Hungarian-matched accuracy, numerical rank, rank sweeps.
//! * [`data`]: synthetic union-of-subspaces data, IDX/CSV/native loaders
//!   and preprocessing.

pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod pipeline;
pub mod prox;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
