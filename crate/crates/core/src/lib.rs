//! Repeated quantum interaction models.
//!
//! A small system with Hilbert space ℂ^{d+1} interacts for a time τ with each
//! element of a chain of (n+1)-level sites prepared in a thermal state. The
//! crate computes the exact reduced dynamics, the effective generators that
//! govern its weak-coupling, small-τ and critical (λ²τ = 1) limits, and
//! numerical certificates for those limits.
//!
//! Superoperators act on observables and are stored as matrices in the
//! column-stacking convention, see [`densela`].

pub mod checks;
pub mod densela;
pub mod error;
pub mod lindblad;
pub mod model;
pub mod perturb;
pub mod qubit;
pub mod reduced;
pub mod regimes;
pub mod report;

pub use error::{Error, Result};

/// Version string embedded in every emitted report.
pub const TOOL_VERSION: &str = concat!("riq ", env!("CARGO_PKG_VERSION"));

/// Vectorization convention embedded in every emitted report.
pub const VEC_CONVENTION: &str = "column-stacking: vec(A X B) = (B^T kron A) vec(X)";
