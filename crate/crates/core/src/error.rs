use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::ParseError;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("pole: denominator modulus below threshold")]
    PoleSignal,

    #[error("domain error: {0}")]
    DomainError(&'static str),

    #[error("node `{0}` is not Wirtinger-differentiable")]
    UnsupportedNode(&'static str),

    #[error("inconclusive order estimate at {point} (slope spread {confidence:.3})")]
    InconclusiveOrder { point: Complex64, confidence: f64 },

    #[error("expression must be holomorphic (no zbar, conj, re, im or abs)")]
    NotHolomorphic,

    #[error("mu+ and mu- both vanish at {0}; data is not a valid Weierstrass triple")]
    BothMuVanish(Complex64),

    #[error("input vector is not of unit length (|x| = {0})")]
    NonUnitInput(f64),

    #[error("adaptive quadrature exceeded {0} refinement levels")]
    MaxDepthExceeded(u32),

    #[error("no admissible path from {from} to {to}: {reason}")]
    PathBlocked {
        from: Complex64,
        to: Complex64,
        reason: String,
    },

    #[error("grid is empty after dropping cells near punctures")]
    EmptyGrid,

    #[error("chart contains the puncture {0}")]
    NotSimplyConnected(Complex64),

    #[error("invalid branch anchor: {0}")]
    BranchAnchorInvalid(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not of the form [[a, -conj(b)], [b, conj(a)]]")]
    NotQuaternionic,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
