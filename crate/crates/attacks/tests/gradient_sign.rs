mod common;

use common::{input2, linear_net, saturate};
use gradlab_attacks::{bim, fgsm, targeted_bim, tgsm, AttackError, PerturbationBudget};
use gradlab_nn::OneHotLabel;

#[test]
fn all_positive_gradient_raises_every_feature_by_epsilon() {
    // With Y = class 0, dL/dx = P1 * (w1 - w0), strictly positive here.
    let net = linear_net([0.0, 0.0], [1.0, 1.0], [0.0, 0.0]);
    let x = input2(0.5, 0.5);
    let y = OneHotLabel::ground_truth(0, 2).unwrap();
    let budget = PerturbationBudget::single_step(0.1).unwrap();
    let result = fgsm(&net, &x, &y, &budget).unwrap();
    for v in result.adversarial.as_f32().unwrap() {
        assert!((v - 0.6).abs() < 1e-6, "feature moved to {v}");
    }
    assert!(!result.masked_gradient);
    assert!((result.achieved_norm - 0.1).abs() < 1e-6);
}

#[test]
fn zero_epsilon_keeps_the_input_and_reports_existing_misclassification() {
    let net = linear_net([1.0, 0.5], [0.0, 0.0], [0.0, 0.0]);
    let budget = PerturbationBudget::single_step(0.0).unwrap();
    let x = input2(0.6, 0.4);
    // The net predicts class 0 here.
    let correct = OneHotLabel::ground_truth(0, 2).unwrap();
    let result = fgsm(&net, &x, &correct, &budget).unwrap();
    assert!(result.adversarial.bit_eq(&x));
    assert!(!result.success);

    let wrong = OneHotLabel::ground_truth(1, 2).unwrap();
    let result = fgsm(&net, &x, &wrong, &budget).unwrap();
    assert!(result.adversarial.bit_eq(&x));
    assert!(result.success, "already misclassified counts as success");
}

#[test]
fn fully_masked_gradient_sets_the_flag_and_leaves_the_input_untouched() {
    // Saturated weights make P exactly one-hot in f32, so P - Y is exactly
    // zero and the input gradient vanishes bit-for-bit.
    let mut net = linear_net([1.0, 0.5], [-0.5, -1.0], [0.0, 0.0]);
    saturate(&mut net, 500.0);
    let x = input2(0.6, 0.4);
    let y = OneHotLabel::ground_truth(0, 2).unwrap();
    let budget = PerturbationBudget::single_step(0.25).unwrap();
    let result = fgsm(&net, &x, &y, &budget).unwrap();
    assert!(result.masked_gradient);
    assert!(result.adversarial.bit_eq(&x));
    assert!(!result.success);
}

#[test]
fn one_iteration_with_full_step_reproduces_the_single_step_attack() {
    let net = linear_net([0.4, -0.3], [-0.2, 0.8], [0.05, -0.02]);
    let x = input2(0.3, 0.7);
    // The net predicts class 1 here; attack from the correct label so the
    // iterative variant actually takes its one step.
    let y = OneHotLabel::ground_truth(1, 2).unwrap();
    let single = PerturbationBudget::single_step(0.2).unwrap();
    let iterated = PerturbationBudget::iterative(0.2, 1).unwrap();
    let a = fgsm(&net, &x, &y, &single).unwrap();
    let b = bim(&net, &x, &y, &iterated).unwrap();
    assert!(a.adversarial.bit_eq(&b.adversarial));
    assert_eq!(a.success, b.success);
}

#[test]
fn already_misclassified_input_returns_at_iteration_zero() {
    let net = linear_net([1.0, 0.5], [0.0, 0.0], [0.0, 0.0]);
    let x = input2(0.6, 0.4); // predicted class 0
    let y = OneHotLabel::ground_truth(1, 2).unwrap(); // so the truth is 1
    let budget = PerturbationBudget::iterative(0.25, 10).unwrap();
    let result = bim(&net, &x, &y, &budget).unwrap();
    assert!(result.success);
    assert_eq!(result.iterations_used, 0);
    assert!(result.adversarial.bit_eq(&x));
}

#[test]
fn targeted_step_subtracts_the_gradient_sign() {
    // Target class 1: dL_target/dx = P0 * (w0 - w1), strictly positive here,
    // so every feature must drop by epsilon.
    let net = linear_net([1.0, 1.0], [0.0, 0.0], [0.0, 0.0]);
    let x = input2(0.5, 0.5);
    let target = OneHotLabel::attack_target(1, 2).unwrap();
    let budget = PerturbationBudget::single_step(0.1).unwrap();
    let result = tgsm(&net, &x, &target, &budget).unwrap();
    for v in result.adversarial.as_f32().unwrap() {
        assert!((v - 0.4).abs() < 1e-6, "feature moved to {v}");
    }
}

#[test]
fn targeted_zero_epsilon_keeps_the_input() {
    let net = linear_net([0.3, -0.4], [0.1, 0.9], [0.0, 0.0]);
    let x = input2(0.25, 0.75);
    let target = OneHotLabel::attack_target(0, 2).unwrap();
    let budget = PerturbationBudget::single_step(0.0).unwrap();
    let result = tgsm(&net, &x, &target, &budget).unwrap();
    assert!(result.adversarial.bit_eq(&x));
}

#[test]
fn target_equal_to_current_prediction_succeeds_at_iteration_zero() {
    let net = linear_net([1.0, 0.5], [0.0, 0.0], [0.0, 0.0]);
    let x = input2(0.6, 0.4); // predicted class 0
    let target = OneHotLabel::attack_target(0, 2).unwrap();
    let budget = PerturbationBudget::iterative(0.25, 10).unwrap();
    let result = targeted_bim(&net, &x, &target, &budget).unwrap();
    assert!(result.success);
    assert_eq!(result.iterations_used, 0);
}

/// For two classes under a unit-temperature softmax, the targeted step toward
/// the other class and the non-targeted step coincide wherever both gradients
/// are nonzero.
#[test]
fn binary_direction_duality() {
    let net = linear_net([0.7, -0.2], [-0.4, 0.9], [0.1, -0.3]);
    let x = input2(0.45, 0.55); // predicted class 1
    let truth = OneHotLabel::ground_truth(1, 2).unwrap();
    let target = OneHotLabel::attack_target(0, 2).unwrap();
    let budget = PerturbationBudget::single_step(0.15).unwrap();
    let non_targeted = fgsm(&net, &x, &truth, &budget).unwrap();
    let targeted = tgsm(&net, &x, &target, &budget).unwrap();
    for (a, b) in non_targeted
        .adversarial
        .as_f32()
        .unwrap()
        .iter()
        .zip(targeted.adversarial.as_f32().unwrap())
    {
        assert!((a - b).abs() < 1e-6, "steps disagree: {a} vs {b}");
    }
}

#[test]
fn out_of_box_inputs_are_rejected() {
    let net = linear_net([0.1, 0.2], [0.3, 0.4], [0.0, 0.0]);
    let x = input2(1.25, 0.5);
    let y = OneHotLabel::ground_truth(0, 2).unwrap();
    let budget = PerturbationBudget::single_step(0.1).unwrap();
    assert!(matches!(
        fgsm(&net, &x, &y, &budget),
        Err(AttackError::InputOutOfRange)
    ));
}
