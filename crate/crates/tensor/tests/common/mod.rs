#![allow(dead_code)]

use gradlab_tensor::{OpSpec, Tensor};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn dense_op(rng: &mut ChaCha8Rng, out: usize, input: usize) -> OpSpec {
    let limit = (6.0 / input as f64).sqrt();
    let weight = Tensor::from_f64(vec![out, input], uniform_vec(rng, out * input, -limit, limit))
        .unwrap();
    let bias = Tensor::from_f64(vec![out], uniform_vec(rng, out, -0.1, 0.1)).unwrap();
    OpSpec::Dense { weight, bias }
}

pub fn conv_op(rng: &mut ChaCha8Rng, out_c: usize, kh: usize, kw: usize, in_c: usize) -> OpSpec {
    let fan_in = (kh * kw * in_c) as f64;
    let limit = (6.0 / fan_in).sqrt();
    let weight = Tensor::from_f64(
        vec![out_c, kh, kw, in_c],
        uniform_vec(rng, out_c * kh * kw * in_c, -limit, limit),
    )
    .unwrap();
    let bias = Tensor::from_f64(vec![out_c], uniform_vec(rng, out_c, -0.1, 0.1)).unwrap();
    OpSpec::Conv2d { weight, bias }
}

pub fn one_hot_f64(index: usize, classes: usize) -> Tensor {
    let mut v = vec![0.0; classes];
    v[index] = 1.0;
    Tensor::vector_f64(v)
}

/// `max |a - b| / max(||b||_inf, 1e-8)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(1e-8f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}
