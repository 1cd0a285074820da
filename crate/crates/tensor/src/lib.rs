//! Flat-buffer tensors and a sequential reverse-mode differentiation engine.
//!
//! A [`ComputationRecord`] is an ordered list of primitive ops (dense, conv2d,
//! relu, maxpool, dropout, flatten, temperature softmax). Running [`ComputationRecord::forward`]
//! retains every intermediate activation so that gradients with respect to the
//! input and the op parameters can be pulled back through the exact reverse of
//! the forward order.
//!
//! Two precisions are supported end to end. Single precision is the experiment
//! mode (gradient underflow behaviour is part of what this workspace measures);
//! double precision backs the finite-difference oracles in [`finite_diff`].

pub mod error;
pub mod finite_diff;
pub mod ops;
pub mod record;
pub mod tensor;

pub use error::TensorError;
pub use ops::{OpSpec, ParamGradient};
pub use record::{BackwardOutput, ComputationRecord};
pub use tensor::{Precision, Scalar, Tensor};

pub type Result<T> = std::result::Result<T, TensorError>;
