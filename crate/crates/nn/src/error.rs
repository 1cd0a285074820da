use gradlab_tensor::TensorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error("temperature must be positive, got {0}")]
    BadTemperature(f64),

    #[error("non-finite logits")]
    NonFiniteLogits,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("not a probability vector: {0}")]
    NotProbabilities(String),

    #[error("one-hot index {index} out of range for {classes} classes")]
    BadHotIndex { index: usize, classes: usize },

    #[error("unsupported input shape {0:?}")]
    UnsupportedInputShape(Vec<usize>),

    #[error("the final layer must be dense with {expected} outputs, found width {actual}")]
    BadLogitsLayer { expected: usize, actual: usize },

    #[error("dropout rate {0} outside [0, 1)")]
    BadDropoutRate(f64),

    #[error("model file {path}: {reason}")]
    Model { path: String, reason: String },

    #[error("io on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
