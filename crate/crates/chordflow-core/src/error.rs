//! Error types shared across the crate.

use thiserror::Error;

/// Which singular factor of the linearized map degenerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausticKind {
    /// `det(1 + M)` vanished (center map caustic).
    Central,
    /// `det(1 - M)` vanished (chord map caustic).
    Chord,
    /// The velocity skew product at the chord tips vanished (Wigner caustic).
    Wigner,
}

impl std::fmt::Display for CausticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CausticKind::Central => write!(f, "central-action caustic"),
            CausticKind::Chord => write!(f, "chord-action caustic"),
            CausticKind::Wigner => write!(f, "Wigner caustic"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("integration failed: step size underflow at t = {t_reached}")]
    IntegrationFailure { t_reached: f64 },

    #[error("root finding failed after {iterations} iterations (residual {residual:.3e})")]
    RootFindFailure { iterations: usize, residual: f64 },

    #[error("{kind} encountered (indicator {indicator:.3e})")]
    Caustic { kind: CausticKind, indicator: f64 },

    #[error("degenerate center: infinitely many chords at (p={p}, q={q})")]
    DegenerateCenter { p: f64, q: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation error: Fock tail |c_nmax|^2 = {tail:.3e} exceeds {limit:.3e}")]
    Truncation { tail: f64, limit: f64 },

    #[error("grid too large for the Moyal quadrature: {n} > cap {cap}")]
    CostGuard { n: usize, cap: usize },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
