use thiserror::Error;

use crate::linalg::Spectrum;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix exponential overflowed (t*|m|_1 = {scaled_norm:e})")]
    ExpmOverflow { scaled_norm: f64 },

    /// The QR iteration stalled. Eigenvalues that were not found are NaN in
    /// `partial`.
    #[error("eigenvalue iteration did not converge ({converged} of {total} found)")]
    NoConvergence {
        converged: usize,
        total: usize,
        partial: Box<Spectrum>,
    },

    #[error(
        "eigenvalues {i} and {j} are {gap:e} apart (limit {limit:e}); \
         the Lagrange basis is ill-posed here, use the Newton family"
    )]
    DegenerateSpectrum {
        i: usize,
        j: usize,
        gap: f64,
        limit: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solution became non-finite after step {last_valid_step}")]
    BlowUp { last_valid_step: usize },

    #[error("convergence study inconclusive: {0}")]
    Inconclusive(String),

    #[error("collocation matrix is ill-conditioned (cond_1 = {0:e}); choose different nodes")]
    IllConditioned(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
