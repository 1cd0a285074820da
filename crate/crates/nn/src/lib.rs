//! Neural-network layer definitions, the temperature softmax, cross-entropy,
//! and the closed-form loss-logit gradient identities used throughout the
//! workspace.
//!
//! A [`Network`] is an ordered layer list ending in a dense logits layer of
//! width `class_count`. Evaluation builds [`gradlab_tensor::ComputationRecord`]s
//! on demand; dropout layers become identity ops in every inference record, so
//! gradient probes and attacks always see the inference-mode network.

pub mod error;
pub mod label;
pub mod layer;
pub mod loss;
pub mod network;
pub mod serialize;
pub mod softmax;

pub use error::NnError;
pub use label::{LabelRole, OneHotLabel};
pub use layer::{Arch, Layer, LayerSpec};
pub use loss::{cross_entropy, loss_logit_gradient, targeted_loss_logit_gradient};
pub use network::{argmax, build_compact_cnn, build_reference_cnn, Network, OutputStage};
pub use softmax::{softmax_jacobian, temperature_softmax};

pub type Result<T> = std::result::Result<T, NnError>;
