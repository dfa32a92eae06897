//! Spectral geometry of the 3-dimensional left-covariant differential
//! calculus on the quantum SU(2) group.
//!
//! The coordinate *-algebra `A_q` of quantum SU(2) is generated by `α, γ`
//! subject to
//!
//! ```text
//! α*α + γ*γ = 1        αα* + q²γ*γ = 1        γγ* = γ*γ
//! αγ = qγα             αγ* = qγ*α             0 < q < 1
//! ```
//!
//! and carries a unique Haar state `h`. Over `A_q` sits the standard
//! 3-dimensional left-covariant *-differential calculus with invariant
//! 1-form basis `η₁, η₂, η₃`, exterior algebra of dimensions (1,3,3,1),
//! a Hodge operator `L` built from the invariant pairing `ω'ω = γ(ω,ω')τ`,
//! and the Hodge Laplacian `∇ = dd* + d*d`.
//!
//! This crate computes the complete eigenvalue structure of `∇` in closed
//! form (weights `λ_k`, `c_k`, `ν_k`, `μ_k±` over the Peter–Weyl blocks of
//! the spin-m matrix coefficients `W^M_{pk}`, `M = 2m+1`) and cross-checks
//! every closed form against brute-force linear algebra assembled from
//! first-principles symbolic PBW arithmetic.
//!
//! Module layout:
//!
//! * [`qalg`] — PBW normal forms, product, star, coproduct, Haar state,
//!   one-parameter group actions on the algebra.
//! * [`corep`] — Peter–Weyl matrices `W^M`, the weights `λ_k`, `c_k`, `ν_k`,
//!   the twisted-derivation actions `E_r`, Gram data, generator
//!   multiplication coefficients.
//! * [`calculus`] — the invariant exterior algebra, forms, wedge, `d`,
//!   `d*`, Hodge operator, integral, twist `σ` and group `β`.
//! * [`spectral`] — closed-form block spectra, brute-force Laplacians,
//!   lower-bound estimates, Hodge decomposition, commutator norms, Dirac
//!   spectrum.

pub mod calculus;
pub mod corep;
pub mod qalg;
pub mod spectral;

pub use qalg::{AlgElement, Gen, GroupTag, PBWMonomial, QContext, TensorElement};

/// Errors surfaced by fallible operations.
#[derive(Debug, thiserror::Error)]
pub enum QError {
    /// A context or operation parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    /// A form term fell outside the configured irrep truncation.
    #[error("truncation exceeded: {0}")]
    Truncation(String),
    /// A request needs PBW data beyond the supported range.
    #[error("PBW range exceeded: {0}")]
    PbwRange(String),
    /// A linear solve hit a singular system.
    #[error("singular system: {0}")]
    Singular(String),
    /// An internal cross-check failed; the computed data is inconsistent.
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QError>;
