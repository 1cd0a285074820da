//! The analytic loss-logit gradient against independent routes: reverse-mode
//! differentiation, finite differences, and the Jacobian chain rule.

use gradlab_tensor::finite_diff::central_difference;
use gradlab_tensor::{ComputationRecord, OpSpec, Precision, Tensor};
use gradlab_nn::{
    loss_logit_gradient, softmax_jacobian, targeted_loss_logit_gradient, temperature_softmax,
    LabelRole, OneHotLabel,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn softmax_record() -> ComputationRecord {
    ComputationRecord::new(vec![OpSpec::SoftmaxT { temperature: 1.0 }], Precision::Double).unwrap()
}

#[test]
fn analytic_gradient_matches_reverse_mode_over_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let n = rng.random_range(2..8);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..6.0)).collect();
        let hot = rng.random_range(0..n);
        let label = OneHotLabel::ground_truth(hot, n).unwrap();

        let logits = Tensor::vector_f64(z);
        let p = temperature_softmax(&logits, 1.0).unwrap();
        let analytic = loss_logit_gradient(&p, &label).unwrap();

        let mut record = softmax_record();
        record.forward(&logits).unwrap();
        let autodiff = record
            .gradient_wrt_input(&logits, &label.to_tensor(Precision::Double))
            .unwrap();

        for (a, b) in analytic
            .as_f64()
            .unwrap()
            .iter()
            .zip(autodiff.as_f64().unwrap())
        {
            assert!((a - b).abs() <= 1e-6, "analytic {a} vs autodiff {b}");
        }
    }
}

#[test]
fn jacobian_matches_finite_differences_of_the_softmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let n = 5;
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let p = temperature_softmax(&Tensor::vector_f64(z.clone()), 1.0).unwrap();
        let jac = softmax_jacobian(&p).unwrap();
        let j = jac.as_f64().unwrap();
        for i in 0..n {
            let fd = central_difference(
                |probe| {
                    temperature_softmax(&Tensor::vector_f64(probe.to_vec()), 1.0)
                        .unwrap()
                        .as_f64()
                        .unwrap()[i]
                },
                &z,
                1e-5,
            )
            .unwrap();
            for (k, want) in fd.iter().enumerate() {
                let got = j[i * n + k];
                assert!((got - want).abs() <= 1e-6, "J[{i}][{k}] {got} vs {want}");
            }
        }
    }
}

/// Chain-rule composition: `J^T (-Y / P)` reproduces `P - Y`.
#[test]
fn jacobian_chain_rule_reproduces_the_analytic_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..200 {
        let n = rng.random_range(2..7);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let hot = rng.random_range(0..n);
        let label = OneHotLabel::ground_truth(hot, n).unwrap();
        let p = temperature_softmax(&Tensor::vector_f64(z), 1.0).unwrap();
        let pv = p.as_f64().unwrap();

        let jac = softmax_jacobian(&p).unwrap();
        let j = jac.as_f64().unwrap();
        let dl_dp: Vec<f64> = (0..n)
            .map(|k| if k == hot { -1.0 / pv[k] } else { 0.0 })
            .collect();
        let composed: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|k| dl_dp[k] * j[k * n + i]).sum())
            .collect();

        let analytic = loss_logit_gradient(&p, &label).unwrap();
        for (a, b) in composed.iter().zip(analytic.as_f64().unwrap()) {
            assert!((a - b).abs() <= 1e-8, "composed {a} vs analytic {b}");
        }
    }
}

fn probability_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1e-6f64..1.0, n).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    })
}

proptest! {
    /// The targeted gradient is the ground-truth formula with a relabeled
    /// target: the two functions agree exactly.
    #[test]
    fn targeted_gradient_equals_relabeled_ground_truth(
        p in probability_vector(4),
        hot in 0usize..4,
    ) {
        let p = Tensor::vector_f64(p);
        let truth = OneHotLabel::new(hot, 4, LabelRole::GroundTruth).unwrap();
        let target = OneHotLabel::new(hot, 4, LabelRole::AttackTarget).unwrap();
        let a = loss_logit_gradient(&p, &truth).unwrap();
        let b = targeted_loss_logit_gradient(&p, &target).unwrap();
        prop_assert!(a.bit_eq(&b));
    }

    /// Every component of P - Y lies in [-1, 1].
    #[test]
    fn gradient_components_are_bounded(
        p in probability_vector(5),
        hot in 0usize..5,
    ) {
        let p = Tensor::vector_f64(p);
        let label = OneHotLabel::ground_truth(hot, 5).unwrap();
        let g = loss_logit_gradient(&p, &label).unwrap();
        for v in g.as_f64().unwrap() {
            prop_assert!((-1.0..=1.0).contains(v), "component {v}");
        }
    }

    /// Softmax never reorders logits, at any temperature.
    #[test]
    fn softmax_preserves_the_argmax(
        z in proptest::collection::vec(-30.0f64..30.0, 2..6),
        t in 1.0f64..1e4,
    ) {
        // Skip near-ties: at extreme flatness finite precision can collapse
        // distinct probabilities onto the same float.
        let mut sorted = z.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] >= 1e-4));

        let logits = Tensor::vector_f64(z.clone());
        let p = temperature_softmax(&logits, t).unwrap();
        prop_assert_eq!(
            gradlab_nn::argmax(&z),
            gradlab_nn::argmax(p.as_f64().unwrap())
        );
    }
}
