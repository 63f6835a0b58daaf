//! Desk-scale toolkit for locally dense lattices and bounded distance decoding.
//!
//! The crate has three layers:
//!
//! * [`numerics`]: floating-point evaluation of the theta series
//!   `Θ_p(τ) = Σ_{z∈Z} exp(-τ|z|^p)`, the Mazo–Odlyzko point-counting bound,
//!   the relative-distance thresholds `α*_p` / `α*_{p,C}` and their
//!   closed-form upper bounds.
//! * [`lattice`] / [`matrix`] / [`norm`]: exact-rational lattice machinery —
//!   ℓp point enumeration, minimum distance, closest vectors, Hermite normal
//!   form — with all promise decisions made exactly (ties on the ball
//!   boundary are resolved symbolically, never by floats).
//! * [`sparsify`] / [`reductions`] / [`oracles`]: random sublattice
//!   sparsification, the GapCVP' → (S,T)-BDD → BDD reduction pipeline, and
//!   independent brute-force oracles that verify every claim the pipeline
//!   makes.

pub use {num_bigint, num_rational};

pub mod instance;
pub mod lattice;
pub mod matrix;
pub mod norm;
pub mod numerics;
pub mod oracles;
pub mod rat;
pub mod reductions;
pub mod sparsify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid norm order: {0}")]
    InvalidNorm(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("basis columns are linearly dependent")]
    SingularBasis,
    #[error("matrix is rank-deficient")]
    RankDeficient,
    #[error("vector lies outside the basis span")]
    OutsideSpan,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no bracket found: {0}")]
    NoBracket(String),
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
