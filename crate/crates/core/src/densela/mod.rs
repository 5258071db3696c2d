//! Dense complex linear algebra: Hermitian eigendecomposition, matrix
//! exponential, Kronecker products, partial traces, norms and the
//! column-stacking vectorization `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

mod eig;
mod expm;
mod matrix;
pub mod random;

pub use eig::{
    cluster_eigenpairs, eigenvalues_general, eigenvector_for, eigh, hermitian_eig, op_norm, SpectralDecomposition,
    DEFAULT_CLUSTER_TOL, HERMITIAN_TOL,
};
pub use expm::{expm, expm_hermitian};
pub use matrix::{kron, partial_trace_last, unvec, vec, ComplexMatrix, C64, I, ONE, ZERO};
