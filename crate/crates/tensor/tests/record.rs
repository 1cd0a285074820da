mod common;

use common::{dense_op, one_hot_f64, relative_error, rng, uniform_vec};
use gradlab_tensor::finite_diff::finite_difference_gradient;
use gradlab_tensor::{ComputationRecord, OpSpec, Precision, Tensor, TensorError};

#[test]
fn single_relu_op() {
    let mut record = ComputationRecord::new(vec![OpSpec::Relu], Precision::Double).unwrap();
    let out = record
        .forward(&Tensor::vector_f64(vec![-1.0, 0.0, 2.0]))
        .unwrap();
    assert_eq!(out.as_f64().unwrap(), &[0.0, 0.0, 2.0]);
}

#[test]
fn empty_record_is_identity() {
    let mut record = ComputationRecord::new(vec![], Precision::Single).unwrap();
    let x = Tensor::vector_f32(vec![0.25, -3.5, 7.0]);
    let out = record.forward(&x).unwrap();
    assert!(out.bit_eq(&x));
}

#[test]
fn identity_dense_then_relu() {
    let weight = Tensor::from_f64(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let bias = Tensor::vector_f64(vec![0.0, 0.0]);
    let mut record = ComputationRecord::new(
        vec![OpSpec::Dense { weight, bias }, OpSpec::Relu],
        Precision::Double,
    )
    .unwrap();
    let out = record.forward(&Tensor::vector_f64(vec![3.0, -3.0])).unwrap();
    assert_eq!(out.as_f64().unwrap(), &[3.0, 0.0]);
}

#[test]
fn shape_mismatch_names_the_op_index() {
    let mut r = rng(11);
    let ops = vec![OpSpec::Relu, dense_op(&mut r, 3, 4), OpSpec::Relu];
    let mut record = ComputationRecord::new(ops, Precision::Double).unwrap();
    let err = record
        .forward(&Tensor::vector_f64(vec![1.0, 2.0]))
        .unwrap_err();
    match err {
        TensorError::ShapeMismatch { index, op, .. } => {
            assert_eq!(index, 1);
            assert_eq!(op, "dense");
        }
        other => panic!("expected shape mismatch, got {other:?}"),
    }
}

#[test]
fn loss_gradient_of_bare_softmax_at_symmetric_logits() {
    let mut record = ComputationRecord::new(
        vec![OpSpec::SoftmaxT { temperature: 1.0 }],
        Precision::Double,
    )
    .unwrap();
    let z = Tensor::vector_f64(vec![0.0, 0.0]);
    record.forward(&z).unwrap();
    let grad = record
        .gradient_wrt_input(&z, &one_hot_f64(0, 2))
        .unwrap();
    let g = grad.as_f64().unwrap();
    assert!((g[0] - -0.5).abs() < 1e-12 && (g[1] - 0.5).abs() < 1e-12, "{g:?}");
}

#[test]
fn saturated_probabilities_matching_the_target_give_a_zero_gradient() {
    // In single precision exp(-240) underflows, so P is exactly [1, 0].
    let mut record = ComputationRecord::new(
        vec![OpSpec::SoftmaxT { temperature: 1.0 }],
        Precision::Single,
    )
    .unwrap();
    let z = Tensor::vector_f32(vec![120.0, -120.0]);
    record.forward(&z).unwrap();
    let grad = record
        .gradient_wrt_input(&z, &Tensor::vector_f32(vec![1.0, 0.0]))
        .unwrap();
    assert!(grad.is_all_zero());
}

#[test]
fn gradient_before_forward_is_an_error() {
    let mut record = ComputationRecord::new(
        vec![OpSpec::SoftmaxT { temperature: 1.0 }],
        Precision::Double,
    )
    .unwrap();
    let z = Tensor::vector_f64(vec![0.0, 0.0]);
    assert!(matches!(
        record.gradient_wrt_input(&z, &one_hot_f64(0, 2)),
        Err(TensorError::BackwardBeforeForward)
    ));
}

#[test]
fn gradient_against_a_different_input_is_an_error() {
    let mut record = ComputationRecord::new(
        vec![OpSpec::SoftmaxT { temperature: 1.0 }],
        Precision::Double,
    )
    .unwrap();
    record.forward(&Tensor::vector_f64(vec![0.0, 0.0])).unwrap();
    assert!(matches!(
        record.gradient_wrt_input(&Tensor::vector_f64(vec![1.0, 0.0]), &one_hot_f64(0, 2)),
        Err(TensorError::StaleTrace)
    ));
}

#[test]
fn target_length_mismatch_is_an_error() {
    let mut record = ComputationRecord::new(
        vec![OpSpec::SoftmaxT { temperature: 1.0 }],
        Precision::Double,
    )
    .unwrap();
    let z = Tensor::vector_f64(vec![0.0, 0.0]);
    record.forward(&z).unwrap();
    assert!(matches!(
        record.gradient_wrt_input(&z, &one_hot_f64(0, 3)),
        Err(TensorError::TargetLength { target: 3, output: 2 })
    ));
}

#[test]
fn three_layer_dense_net_matches_finite_differences() {
    let mut r = rng(42);
    let ops = vec![
        dense_op(&mut r, 8, 6),
        OpSpec::Relu,
        dense_op(&mut r, 8, 8),
        OpSpec::Relu,
        dense_op(&mut r, 3, 8),
        OpSpec::SoftmaxT { temperature: 1.0 },
    ];
    let mut record = ComputationRecord::new(ops, Precision::Double).unwrap();
    let x = Tensor::vector_f64(uniform_vec(&mut r, 6, -2.0, 2.0));
    let y = one_hot_f64(1, 3);
    record.forward(&x).unwrap();
    let grad = record.gradient_wrt_input(&x, &y).unwrap();
    let oracle = finite_difference_gradient(&record, &x, &y, 1e-5).unwrap();
    let err = relative_error(grad.as_f64().unwrap(), oracle.as_f64().unwrap());
    assert!(err <= 1e-4, "relative error {err}");
}

#[test]
fn forward_and_backward_are_deterministic() {
    let mut r = rng(9);
    let ops = vec![
        dense_op(&mut r, 5, 4),
        OpSpec::Relu,
        dense_op(&mut r, 2, 5),
        OpSpec::SoftmaxT { temperature: 1.0 },
    ];
    let x = Tensor::vector_f64(uniform_vec(&mut r, 4, -1.0, 1.0));
    let y = one_hot_f64(0, 2);
    let run = |ops: Vec<OpSpec>| {
        let mut record = ComputationRecord::new(ops, Precision::Double).unwrap();
        let out = record.forward(&x).unwrap();
        let grad = record.gradient_wrt_input(&x, &y).unwrap();
        (out, grad)
    };
    let (out_a, grad_a) = run(ops.clone());
    let (out_b, grad_b) = run(ops);
    assert!(out_a.bit_eq(&out_b));
    assert!(grad_a.bit_eq(&grad_b));
}
