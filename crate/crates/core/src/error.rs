use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("probe point {point} lies outside the open polydisk")]
    EvaluationOutsideDomain { point: String },

    #[error("Möbius denominator vanished at z = {z}")]
    PoleHit { z: String },

    #[error("invalid value: {0}")]
    Validity(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("parameters do not approach the distinguished boundary by index {horizon}: worst 1-|alpha| = {worst_gap:.3e} > {threshold:.3e}")]
    NoBoundaryConvergence {
        horizon: usize,
        worst_gap: f64,
        threshold: f64,
    },

    #[error("no permutation repeats within the first {horizon} indices")]
    EmptySelection { horizon: usize },

    #[error("Schur parameter {index} has modulus {modulus} (on or outside the unit circle)")]
    SchurParameterOutOfDisk { index: usize, modulus: f64 },

    #[error("phase solve did not converge (residual {residual:.3e})")]
    RootFindFailure { residual: f64 },

    #[error("approximant has modulus {modulus} at the pin point, expected 1")]
    PinNotUnimodular { modulus: f64 },

    #[error("projection reached error {achieved:.3e}, tolerance was {tolerance:.3e}")]
    ProjectionFailed { achieved: f64, tolerance: f64 },

    #[error("multivariate target is not of product form: {0}")]
    UnsupportedTargetShape(String),

    #[error("stage {stage}: no admissible index up to {horizon} (best condition (a) {best_a:.3e}, (b) {best_b:.3e}, budget {budget:.3e})")]
    SequenceExhausted {
        stage: usize,
        horizon: u64,
        best_a: f64,
        best_b: f64,
        budget: f64,
    },

    #[error("stage {stage}: factor interference {value:.3e} exceeds budget {budget:.3e}")]
    InterferenceBudgetExceeded {
        stage: usize,
        value: f64,
        budget: f64,
    },

    #[error("radius {radius} coincides with a zero modulus")]
    RadiusOnZeroModulus { radius: f64 },
}

impl Error {
    /// Stable machine-readable tag, used in report error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EvaluationOutsideDomain { .. } => "EvaluationOutsideDomain",
            Error::PoleHit { .. } => "PoleHit",
            Error::Validity(_) => "ValidityError",
            Error::Parse { .. } => "ParseError",
            Error::NoBoundaryConvergence { .. } => "NoBoundaryConvergence",
            Error::EmptySelection { .. } => "EmptySelection",
            Error::SchurParameterOutOfDisk { .. } => "SchurParameterOutOfDisk",
            Error::RootFindFailure { .. } => "RootFindFailure",
            Error::PinNotUnimodular { .. } => "PinNotUnimodular",
            Error::ProjectionFailed { .. } => "ProjectionFailed",
            Error::UnsupportedTargetShape(_) => "UnsupportedTargetShape",
            Error::SequenceExhausted { .. } => "SequenceExhausted",
            Error::InterferenceBudgetExceeded { .. } => "InterferenceBudgetExceeded",
            Error::RadiusOnZeroModulus { .. } => "RadiusOnZeroModulus",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
