//! Adversarial-example crafting against a trained [`gradlab_nn::Network`].
//!
//! Five attacks are implemented: single-step and iterative gradient-sign
//! methods in both non-targeted and targeted form, a greedy saliency-pair
//! attack over the softmax Jacobian, and an L2-minimal logit-space
//! optimization attack. All of them clamp candidates to the `[0, 1]` input
//! box and re-evaluate the network on the final candidate, so the recorded
//! prediction and success flag are always reproducible.

pub mod batch;
pub mod budget;
pub mod cw;
pub mod error;
pub mod gradient_sign;
pub mod jsma;
pub mod result;

pub use batch::{run_batch, success_rate, to_csv, AttackSpec, BatchItem, TargetPolicy};
pub use budget::{NormKind, PerturbationBudget};
pub use cw::{cw_l2, CwConfig, CwTrial};
pub use error::AttackError;
pub use gradient_sign::{bim, fgsm, targeted_bim, tgsm};
pub use jsma::{jsma, JsmaConfig};
pub use result::AttackResult;

pub type Result<T> = std::result::Result<T, AttackError>;
