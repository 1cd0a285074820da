//! Greedy saliency-pair attack over the softmax Jacobian.
//!
//! Each iteration pulls two rows of the probability Jacobian with respect to
//! the input (target class up, predicted class down), scores every still-
//! movable feature pair by (gain in target probability) x (drop in true
//! probability), and perturbs the best pair by `theta`. Saturated features
//! leave the search domain. When no pair has usable gradient signs the attack
//! stops early and flags premature termination; a saturated softmax makes
//! both Jacobian rows vanish, which is exactly how that flag fires on
//! heavily distilled networks.

use gradlab_nn::{Network, OneHotLabel, OutputStage};
use gradlab_tensor::{Precision, Tensor};

use crate::budget::{NormKind, PerturbationBudget};
use crate::error::AttackError;
use crate::gradient_sign::finish;
use crate::result::AttackResult;
use crate::Result;

/// Feature-space limit for the full Jacobian scan; the pair search is
/// quadratic in the input dimensionality.
pub const MAX_JACOBIAN_DIM: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct JsmaConfig {
    /// Total number of features the attack may change; two per iteration.
    pub max_features: usize,
    /// Per-feature change; positive drives features toward full intensity.
    pub theta: f64,
}

impl Default for JsmaConfig {
    fn default() -> Self {
        Self {
            max_features: 112,
            theta: 1.0,
        }
    }
}

pub fn jsma(
    net: &Network,
    x: &Tensor,
    target: &OneHotLabel,
    config: &JsmaConfig,
) -> Result<AttackResult> {
    if config.max_features % 2 != 0 {
        return Err(AttackError::OddFeatureBudget(config.max_features));
    }
    if x.len() > MAX_JACOBIAN_DIM {
        return Err(AttackError::JacobianTooLarge {
            dim: x.len(),
            limit: MAX_JACOBIAN_DIM,
        });
    }
    if x.shape() != net.input_shape() {
        return Err(AttackError::InputShape {
            input: x.shape().to_vec(),
            net: net.input_shape(),
        });
    }
    let values = x.to_f64_vec();
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(AttackError::InputOutOfRange);
    }

    let classes = net.class_count();
    let target_index = target.hot_index();
    // The class whose probability the attack suppresses: the network's
    // current prediction for the clean input.
    let true_index = net.predict(x)?;

    let theta = config.theta;
    let mut current = x.clone();
    let mut movable: Vec<bool> = values
        .iter()
        .map(|&v| if theta > 0.0 { v < 1.0 } else { v > 0.0 })
        .collect();
    let mut premature = false;
    let mut pairs_applied = 0usize;

    while pairs_applied * 2 < config.max_features {
        if net.predict(&current)? == target_index {
            break;
        }
        let gain = probability_gradient(net, &current, target_index, classes)?;
        let drop = probability_gradient(net, &current, true_index, classes)?;

        let Some((i, j)) = best_pair(&gain, &drop, &movable, theta) else {
            premature = true;
            break;
        };

        for index in [i, j] {
            nudge(&mut current, index, theta)?;
            let v = current.to_f64_vec()[index];
            if (theta > 0.0 && v >= 1.0) || (theta < 0.0 && v <= 0.0) {
                movable[index] = false;
            }
        }
        pairs_applied += 1;
    }

    let budget = PerturbationBudget {
        norm: NormKind::L0,
        epsilon: config.max_features as f64,
        step: theta.abs(),
        max_iters: config.max_features / 2,
    };
    let mut result = finish(
        net,
        x,
        current,
        Some(target_index),
        &budget,
        pairs_applied,
        false,
        |p| p == target_index,
    )?;
    result.premature_termination = premature;
    Ok(result)
}

/// d P(class) / d input, pulled back through the inference-mode softmax.
fn probability_gradient(
    net: &Network,
    x: &Tensor,
    class: usize,
    classes: usize,
) -> Result<Vec<f64>> {
    let cotangent = match net.precision() {
        Precision::Single => {
            let mut v = vec![0.0f32; classes];
            v[class] = 1.0;
            Tensor::vector_f32(v)
        }
        Precision::Double => {
            let mut v = vec![0.0f64; classes];
            v[class] = 1.0;
            Tensor::vector_f64(v)
        }
    };
    Ok(net
        .output_gradient(x, &cotangent, OutputStage::Probabilities)?
        .to_f64_vec())
}

/// Exhaustive scan: the pair maximizing (target gain) x (true drop), under
/// the sign conditions that make a `theta` move actually help.
pub fn best_pair(
    gain: &[f64],
    drop: &[f64],
    movable: &[bool],
    theta: f64,
) -> Option<(usize, usize)> {
    let candidates: Vec<usize> = (0..gain.len()).filter(|&i| movable[i]).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for (a, &i) in candidates.iter().enumerate() {
        for &j in &candidates[a + 1..] {
            let target_effect = theta * (gain[i] + gain[j]);
            let true_effect = theta * (drop[i] + drop[j]);
            if target_effect <= 0.0 || true_effect >= 0.0 {
                continue;
            }
            let score = target_effect * (-true_effect);
            if best.map_or(true, |(s, _, _)| score > s) {
                best = Some((score, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

fn nudge(current: &mut Tensor, index: usize, theta: f64) -> Result<()> {
    match current.precision() {
        Precision::Single => current.map_mut_f32(|v| {
            v[index] = (v[index] + theta as f32).clamp(0.0, 1.0);
        })?,
        Precision::Double => current.map_mut_f64(|v| {
            v[index] = (v[index] + theta).clamp(0.0, 1.0);
        })?,
    }
    Ok(())
}

