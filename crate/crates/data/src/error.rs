use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad magic {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        path: String,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated, needed {expected} more bytes")]
    Truncated { path: String, expected: usize },

    #[error("image file holds {images} samples but label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("class {0} is not present in the dataset")]
    ClassAbsent(u8),

    #[error("binary reduction needs two distinct classes, got {0} twice")]
    SameClass(u8),

    #[error("dataset is empty")]
    Empty,

    #[error("dataset has fewer than two classes; cannot pick a random pair")]
    TooFewClasses,

    #[error("{0}")]
    Invalid(String),
}
