use num_complex::Complex64;
use thiserror::Error;

use crate::rootfind::Pole;

pub type Result<T> = std::result::Result<T, SsrError>;

#[derive(Debug, Clone, Error)]
pub enum SsrError {
    #[error("singular detuning: the qubit matrix has a pole at delta = 0")]
    SingularDetuning,

    #[error("matrix is not unimodular (det = {det})")]
    NonUnimodular { det: Complex64 },

    #[error("(T^N)_11 vanishes at real detuning {delta}; no scattering solution")]
    OnResonancePole { delta: f64 },

    #[error("zero on or near the search boundary after {retries} jittered retries")]
    BoundaryDegeneracy { retries: usize },

    #[error("refinement did not converge (best iterate {best}, residual {residual:e})")]
    RefinementFailure { best: Complex64, residual: f64 },

    #[error("pole continuation broke down at L = {at} after {} accepted points", partial.len())]
    ContinuationBreakdown { at: f64, partial: Vec<Pole> },

    #[error("no nonzero pole found in the search window")]
    WindowExhausted,

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl SsrError {
    /// True for usage/precondition errors, as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            SsrError::Contract(_) | SsrError::Domain(_) | SsrError::SingularDetuning
        )
    }
}
