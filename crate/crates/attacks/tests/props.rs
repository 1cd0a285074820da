//! Attack invariants that need no trained model: the box constraint, the
//! radius budget, and success-flag honesty, over random small networks.

mod common;

use gradlab_attacks::{bim, fgsm, targeted_bim, tgsm, PerturbationBudget};
use gradlab_nn::{LayerSpec, Network, OneHotLabel};
use gradlab_tensor::{Precision, Tensor};
use proptest::prelude::*;

fn random_net(seed: u64) -> Network {
    Network::new(
        &[
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 6 },
            LayerSpec::Relu,
            LayerSpec::Dense { units: 2 },
        ],
        [2, 2, 1],
        2,
        Precision::Single,
        seed,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn box_budget_and_honesty_hold_for_every_gradient_sign_attack(
        seed in 0u64..512,
        raw in proptest::collection::vec(0.0f32..=1.0, 4),
        epsilon in 0.0f64..0.5,
        label in 0usize..2,
        iters in 1usize..6,
    ) {
        let net = random_net(seed);
        let x = Tensor::from_f32(vec![2, 2, 1], raw).unwrap();
        let truth = OneHotLabel::ground_truth(label, 2).unwrap();
        let target = OneHotLabel::attack_target(1 - label, 2).unwrap();

        let single = PerturbationBudget::single_step(epsilon).unwrap();
        let multi = PerturbationBudget::iterative(epsilon, iters).unwrap();
        let results = [
            fgsm(&net, &x, &truth, &single).unwrap(),
            bim(&net, &x, &truth, &multi).unwrap(),
            tgsm(&net, &x, &target, &single).unwrap(),
            targeted_bim(&net, &x, &target, &multi).unwrap(),
        ];
        for (which, result) in results.iter().enumerate() {
            let adv = result.adversarial.as_f32().unwrap();
            prop_assert!(
                adv.iter().all(|&v| (0.0..=1.0).contains(&v)),
                "attack {which}: box violated"
            );
            let linf = result.adversarial.linf_distance(&x).unwrap();
            prop_assert!(
                linf <= epsilon + 1e-6,
                "attack {which}: radius {linf} over budget {epsilon}"
            );
            // Honesty: re-evaluating the network reproduces the record.
            let predicted = net.predict(&result.adversarial).unwrap();
            prop_assert_eq!(predicted, result.predicted_label);
            let expected_success = match result.target_label {
                Some(t) => predicted == t,
                None => predicted != label,
            };
            prop_assert_eq!(result.success, expected_success);
        }
    }

    /// A masked gradient always means a null perturbation.
    #[test]
    fn masked_flag_implies_unchanged_input(
        seed in 0u64..256,
        raw in proptest::collection::vec(0.0f32..=1.0, 4),
        label in 0usize..2,
    ) {
        let mut net = random_net(seed);
        common::saturate(&mut net, 400.0);
        let x = Tensor::from_f32(vec![2, 2, 1], raw).unwrap();
        let truth = OneHotLabel::ground_truth(label, 2).unwrap();
        let budget = PerturbationBudget::single_step(0.25).unwrap();
        let result = fgsm(&net, &x, &truth, &budget).unwrap();
        if result.masked_gradient {
            prop_assert!(result.adversarial.bit_eq(&x));
        }
    }
}
