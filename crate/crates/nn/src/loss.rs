//! Cross-entropy and the loss-logit gradient identities.

use gradlab_tensor::ops::log_clamp_epsilon;
use gradlab_tensor::{Precision, Tensor};

use crate::error::NnError;
use crate::label::OneHotLabel;
use crate::softmax::validate_probabilities;
use crate::Result;

/// `-ln(P_true)`, natural log, evaluated in the probability vector's
/// precision.
///
/// A saturated `P_true == 0` is clamped up to a precision-dependent epsilon
/// rather than returning infinity; the clamp event is logged at debug level.
pub fn cross_entropy(probabilities: &Tensor, label: &OneHotLabel) -> Result<f64> {
    validate_probabilities(probabilities)?;
    if probabilities.len() != label.len() {
        return Err(NnError::LengthMismatch {
            left: probabilities.len(),
            right: label.len(),
        });
    }
    let eps = log_clamp_epsilon(probabilities.precision());
    let p_true = probabilities.to_f64_vec()[label.hot_index()];
    if p_true < eps {
        log::debug!("cross-entropy clamp: P_true = {p_true} raised to {eps}");
    }
    let loss = match probabilities.precision() {
        Precision::Single => -((p_true as f32).max(eps as f32).ln()) as f64,
        Precision::Double => -p_true.max(eps).ln(),
    };
    Ok(loss)
}

/// The loss gradient at the logits for a ground-truth label: `P - Y`,
/// computed exactly from the given probabilities.
pub fn loss_logit_gradient(probabilities: &Tensor, label: &OneHotLabel) -> Result<Tensor> {
    gradient_impl(probabilities, label)
}

/// The loss gradient at the logits for an attack target: `P - Y_target`.
///
/// This is the ground-truth formula with the label relabeled, and the two
/// functions agree exactly for every probability/label pair.
pub fn targeted_loss_logit_gradient(
    probabilities: &Tensor,
    target: &OneHotLabel,
) -> Result<Tensor> {
    gradient_impl(probabilities, target)
}

fn gradient_impl(probabilities: &Tensor, label: &OneHotLabel) -> Result<Tensor> {
    validate_probabilities(probabilities)?;
    if probabilities.len() != label.len() {
        return Err(NnError::LengthMismatch {
            left: probabilities.len(),
            right: label.len(),
        });
    }
    let hot = label.hot_index();
    match probabilities.precision() {
        Precision::Single => {
            let mut g = probabilities.as_f32()?.to_vec();
            g[hot] -= 1.0;
            Ok(Tensor::vector_f32(g))
        }
        Precision::Double => {
            let mut g = probabilities.as_f64()?.to_vec();
            g[hot] -= 1.0;
            Ok(Tensor::vector_f64(g))
        }
    }
}
