//! Single-step and iterative gradient-sign attacks, non-targeted and
//! targeted.
//!
//! The non-targeted step ascends the true-class loss; the targeted step
//! descends the target-class loss (the perturbation is subtracted). Every
//! candidate is clamped to the `[0, 1]` box, and iterative variants are also
//! projected back into the epsilon ball around the clean input before the
//! success check.

use gradlab_nn::{Network, OneHotLabel};
use gradlab_tensor::{Precision, Scalar, Tensor};

use crate::budget::PerturbationBudget;
use crate::error::AttackError;
use crate::result::AttackResult;
use crate::Result;

#[derive(Clone, Copy)]
enum Direction {
    /// `x + step * sign(g)`: increase the loss (non-targeted).
    Ascend,
    /// `x - step * sign(g)`: decrease the loss toward a target.
    Descend,
}

/// One gradient-sign step of the full radius against the true label.
/// A fully masked gradient (`sign(0) == 0` everywhere) leaves the input
/// unchanged and sets the masked-gradient flag.
pub fn fgsm(
    net: &Network,
    x: &Tensor,
    y_true: &OneHotLabel,
    budget: &PerturbationBudget,
) -> Result<AttackResult> {
    validate_input(net, x)?;
    let back = net.loss_backward(x, &y_true.to_tensor(net.precision()))?;
    let masked = back.input_gradient.is_all_zero();
    let adv = signed_step(x, &back.input_gradient, budget.epsilon, Direction::Ascend)?;
    finish(net, x, adv, None, budget, 1, masked, |p| {
        p != y_true.hot_index()
    })
}

/// Iterated gradient-sign steps with per-step re-evaluation, early exit on
/// success (checked after projection), and projection to the epsilon ball.
pub fn bim(
    net: &Network,
    x: &Tensor,
    y_true: &OneHotLabel,
    budget: &PerturbationBudget,
) -> Result<AttackResult> {
    validate_input(net, x)?;
    let true_index = y_true.hot_index();
    let target = y_true.to_tensor(net.precision());
    iterate(net, x, &target, budget, Direction::Ascend, move |p| {
        p != true_index
    })
}

/// One gradient-sign step of the full radius toward a target class; the
/// perturbation is subtracted.
pub fn tgsm(
    net: &Network,
    x: &Tensor,
    target: &OneHotLabel,
    budget: &PerturbationBudget,
) -> Result<AttackResult> {
    validate_input(net, x)?;
    let back = net.loss_backward(x, &target.to_tensor(net.precision()))?;
    let masked = back.input_gradient.is_all_zero();
    let adv = signed_step(x, &back.input_gradient, budget.epsilon, Direction::Descend)?;
    let hot = target.hot_index();
    finish(net, x, adv, Some(hot), budget, 1, masked, move |p| p == hot)
}

/// Iterated targeted steps; stops as soon as the target class is predicted.
pub fn targeted_bim(
    net: &Network,
    x: &Tensor,
    target: &OneHotLabel,
    budget: &PerturbationBudget,
) -> Result<AttackResult> {
    validate_input(net, x)?;
    let hot = target.hot_index();
    let target = target.to_tensor(net.precision());
    let mut result = iterate(net, x, &target, budget, Direction::Descend, move |p| p == hot)?;
    result.target_label = Some(hot);
    Ok(result)
}

fn iterate(
    net: &Network,
    x: &Tensor,
    loss_target: &Tensor,
    budget: &PerturbationBudget,
    direction: Direction,
    succeeded: impl Fn(usize) -> bool,
) -> Result<AttackResult> {
    let mut current = x.clone();
    if succeeded(net.predict(&current)?) {
        return finish(net, x, current, None, budget, 0, false, succeeded);
    }
    let mut masked = false;
    let mut iterations = 0;
    for _ in 0..budget.max_iters {
        let back = net.loss_backward(&current, loss_target)?;
        if back.input_gradient.is_all_zero() {
            masked = iterations == 0;
            break;
        }
        current = signed_step(&current, &back.input_gradient, budget.step, direction)?;
        current = project_ball(&current, x, budget.epsilon)?;
        iterations += 1;
        if succeeded(net.predict(&current)?) {
            break;
        }
    }
    finish(net, x, current, None, budget, iterations, masked, succeeded)
}

fn validate_input(net: &Network, x: &Tensor) -> Result<()> {
    if x.shape() != net.input_shape() {
        return Err(AttackError::InputShape {
            input: x.shape().to_vec(),
            net: net.input_shape(),
        });
    }
    let in_box = match x.precision() {
        Precision::Single => x.as_f32()?.iter().all(|&v| (0.0..=1.0).contains(&v)),
        Precision::Double => x.as_f64()?.iter().all(|&v| (0.0..=1.0).contains(&v)),
    };
    if !in_box {
        return Err(AttackError::InputOutOfRange);
    }
    Ok(())
}

/// `clamp01(x ± step * sign(g))` in the input's precision; `sign(0)` is 0.
fn signed_step(x: &Tensor, gradient: &Tensor, step: f64, direction: Direction) -> Result<Tensor> {
    match x.precision() {
        Precision::Single => signed_step_typed::<f32>(x, gradient, step, direction),
        Precision::Double => signed_step_typed::<f64>(x, gradient, step, direction),
    }
}

fn signed_step_typed<S: Scalar>(
    x: &Tensor,
    gradient: &Tensor,
    step: f64,
    direction: Direction,
) -> Result<Tensor> {
    let xs = S::slice(x)?;
    let gs = S::slice(gradient)?;
    let step = match direction {
        Direction::Ascend => S::from_f64(step),
        Direction::Descend => -S::from_f64(step),
    };
    let out = xs
        .iter()
        .zip(gs)
        .map(|(&v, &g)| {
            let sign = if g > S::zero() {
                S::one()
            } else if g < S::zero() {
                -S::one()
            } else {
                S::zero()
            };
            clamp01(v + step * sign)
        })
        .collect();
    Ok(S::tensor(x.shape().to_vec(), out))
}

/// Project back into the infinity-norm ball of radius `epsilon` around
/// `origin`, then into the `[0, 1]` box.
fn project_ball(candidate: &Tensor, origin: &Tensor, epsilon: f64) -> Result<Tensor> {
    match candidate.precision() {
        Precision::Single => project_typed::<f32>(candidate, origin, epsilon),
        Precision::Double => project_typed::<f64>(candidate, origin, epsilon),
    }
}

fn project_typed<S: Scalar>(candidate: &Tensor, origin: &Tensor, epsilon: f64) -> Result<Tensor> {
    let c = S::slice(candidate)?;
    let o = S::slice(origin)?;
    let eps = S::from_f64(epsilon);
    // Coordinates already inside the ball keep their exact bits.
    let out = c
        .iter()
        .zip(o)
        .map(|(&v, &base)| {
            if v - base > eps {
                clamp01(base + eps)
            } else if base - v > eps {
                clamp01(base - eps)
            } else {
                v
            }
        })
        .collect();
    Ok(S::tensor(candidate.shape().to_vec(), out))
}

fn clamp01<S: Scalar>(v: S) -> S {
    v.max(S::zero()).min(S::one())
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn finish(
    net: &Network,
    clean: &Tensor,
    adversarial: Tensor,
    target_label: Option<usize>,
    budget: &PerturbationBudget,
    iterations_used: usize,
    masked_gradient: bool,
    succeeded: impl Fn(usize) -> bool,
) -> Result<AttackResult> {
    let predicted_label = net.predict(&adversarial)?;
    let achieved_norm = match budget.norm {
        crate::budget::NormKind::Linf => adversarial.linf_distance(clean)?,
        crate::budget::NormKind::L2 => adversarial.l2_distance(clean)?,
        crate::budget::NormKind::L0 => adversarial.l0_distance(clean, 0.0)?,
    };
    Ok(AttackResult {
        success: succeeded(predicted_label),
        predicted_label,
        target_label,
        iterations_used,
        achieved_norm,
        masked_gradient,
        premature_termination: false,
        search_trace: None,
        adversarial,
    })
}
