use crate::tensor::Precision;
use thiserror::Error;

/// Errors raised by tensor construction and record evaluation.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape {shape:?} implies {expected} elements but buffer holds {actual}")]
    LengthMismatch {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },

    #[error("precision mismatch: expected {expected:?}, got {actual:?}")]
    PrecisionMismatch {
        expected: Precision,
        actual: Precision,
    },

    #[error("op {index} ({op}): input shape {shape:?} rejected: {reason}")]
    ShapeMismatch {
        index: usize,
        op: &'static str,
        shape: Vec<usize>,
        reason: String,
    },

    #[error("op {index} ({op}): {reason}")]
    InvalidOp {
        index: usize,
        op: &'static str,
        reason: String,
    },

    #[error("gradient requested before a forward pass")]
    BackwardBeforeForward,

    #[error("saved forward trace does not match the supplied input")]
    StaleTrace,

    #[error("loss target has {target} entries but the output has {output}")]
    TargetLength { target: usize, output: usize },

    #[error("loss gradients require the record to end with a softmax op")]
    MissingProbabilityHead,

    #[error("finite differences must run in double precision, got {0:?}")]
    OracleNeedsDouble(Precision),

    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{0}")]
    Invalid(String),
}
