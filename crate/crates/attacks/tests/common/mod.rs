#![allow(dead_code)]

use gradlab_nn::{LayerSpec, Network};
use gradlab_tensor::{Precision, Tensor};

/// A two-feature, two-class linear model: logits `z = W x + b` with rows
/// `w0`, `w1`. Input shape is `[1, 2, 1]`.
pub fn linear_net(w0: [f32; 2], w1: [f32; 2], bias: [f32; 2]) -> Network {
    let mut net = Network::new(
        &[LayerSpec::Flatten, LayerSpec::Dense { units: 2 }],
        [1, 2, 1],
        2,
        Precision::Single,
        0,
    )
    .unwrap();
    set_dense(&mut net, 1, &[w0[0], w0[1], w1[0], w1[1]], &bias);
    net
}

/// A four-feature, two-class linear model on input shape `[1, 4, 1]`.
pub fn linear_net4(w0: [f32; 4], w1: [f32; 4], bias: [f32; 2]) -> Network {
    let mut net = Network::new(
        &[LayerSpec::Flatten, LayerSpec::Dense { units: 2 }],
        [1, 4, 1],
        2,
        Precision::Single,
        0,
    )
    .unwrap();
    let mut w = Vec::new();
    w.extend_from_slice(&w0);
    w.extend_from_slice(&w1);
    set_dense(&mut net, 1, &w, &bias);
    net
}

pub fn set_dense(net: &mut Network, layer: usize, weights: &[f32], bias: &[f32]) {
    let shape = net.layers()[layer]
        .weight
        .as_ref()
        .expect("dense layer")
        .shape()
        .to_vec();
    net.layers_mut()[layer].weight = Some(Tensor::from_f32(shape, weights.to_vec()).unwrap());
    net.layers_mut()[layer].bias = Some(Tensor::vector_f32(bias.to_vec()));
}

/// Multiplies every parameter so the softmax saturates exactly in f32.
pub fn saturate(net: &mut Network, factor: f32) {
    for layer in net.layers_mut() {
        if let Some(w) = layer.weight.as_mut() {
            w.map_mut_f32(|v| v.iter_mut().for_each(|x| *x *= factor))
                .unwrap();
        }
        if let Some(b) = layer.bias.as_mut() {
            b.map_mut_f32(|v| v.iter_mut().for_each(|x| *x *= factor))
                .unwrap();
        }
    }
}

pub fn input2(a: f32, b: f32) -> Tensor {
    Tensor::from_f32(vec![1, 2, 1], vec![a, b]).unwrap()
}

pub fn input4(v: [f32; 4]) -> Tensor {
    Tensor::from_f32(vec![1, 4, 1], v.to_vec()).unwrap()
}
