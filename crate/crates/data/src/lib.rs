//! Dataset ingestion and the binary class reduction.
//!
//! MNIST-style IDX files are the on-disk interchange format (big-endian
//! headers, unsigned byte payload). CIFAR-10's binary format is a declared
//! extension point, not implemented here.

pub mod dataset;
pub mod error;
pub mod idx;
pub mod synth;

pub use dataset::{binary_reduce, ClassSelection, LabeledDataset, Split};
pub use error::DataError;
pub use idx::load_idx;

pub type Result<T> = std::result::Result<T, DataError>;
