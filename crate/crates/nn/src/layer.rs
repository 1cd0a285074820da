//! Layer specifications, shape inference, and weight initialization.

use gradlab_tensor::{Precision, Tensor};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::NnError;
use crate::Result;

/// Architectural description of one layer, without parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerSpec {
    /// Valid padding, stride 1.
    Conv2d {
        out_channels: usize,
        kernel: (usize, usize),
    },
    Relu,
    MaxPool2x2,
    /// Training-time mask; identity during inference, probes, and attacks.
    Dropout { rate: f64 },
    Flatten,
    Dense { units: usize },
}

/// A layer spec plus its parameters (conv and dense only).
#[derive(Clone, Debug)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weight: Option<Tensor>,
    pub bias: Option<Tensor>,
}

/// Named architectures the experiment pipelines can instantiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arch {
    /// conv(32, 3x3) relu, conv(64, 3x3) relu, maxpool 2x2, dropout 0.25,
    /// flatten, dense(128) relu, dropout 0.5, dense(N).
    ReferenceCnn,
    /// A deliberately smaller net for surrogate-model experiments:
    /// conv(8, 3x3) relu, maxpool 2x2, flatten, dense(32) relu, dense(N).
    CompactCnn,
}

impl Arch {
    pub fn id(&self) -> &'static str {
        match self {
            Arch::ReferenceCnn => "reference",
            Arch::CompactCnn => "compact",
        }
    }

    pub fn from_id(id: &str) -> Option<Arch> {
        match id {
            "reference" => Some(Arch::ReferenceCnn),
            "compact" => Some(Arch::CompactCnn),
            _ => None,
        }
    }

    pub fn layers(&self, class_count: usize) -> Vec<LayerSpec> {
        match self {
            Arch::ReferenceCnn => vec![
                LayerSpec::Conv2d {
                    out_channels: 32,
                    kernel: (3, 3),
                },
                LayerSpec::Relu,
                LayerSpec::Conv2d {
                    out_channels: 64,
                    kernel: (3, 3),
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool2x2,
                LayerSpec::Dropout { rate: 0.25 },
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 128 },
                LayerSpec::Relu,
                LayerSpec::Dropout { rate: 0.5 },
                LayerSpec::Dense { units: class_count },
            ],
            Arch::CompactCnn => vec![
                LayerSpec::Conv2d {
                    out_channels: 8,
                    kernel: (3, 3),
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool2x2,
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 32 },
                LayerSpec::Relu,
                LayerSpec::Dense { units: class_count },
            ],
        }
    }
}

/// Output shape of `spec` applied to `shape`, or an error describing why the
/// configuration is rejected.
pub(crate) fn output_shape(spec: &LayerSpec, shape: &[usize]) -> Result<Vec<usize>> {
    let bad = || NnError::UnsupportedInputShape(shape.to_vec());
    match spec {
        LayerSpec::Conv2d {
            out_channels,
            kernel,
        } => {
            if shape.len() != 3 || shape[0] < kernel.0 || shape[1] < kernel.1 {
                return Err(bad());
            }
            Ok(vec![
                shape[0] - kernel.0 + 1,
                shape[1] - kernel.1 + 1,
                *out_channels,
            ])
        }
        LayerSpec::Relu => Ok(shape.to_vec()),
        LayerSpec::MaxPool2x2 => {
            if shape.len() != 3 || shape[0] % 2 != 0 || shape[1] % 2 != 0 {
                return Err(bad());
            }
            Ok(vec![shape[0] / 2, shape[1] / 2, shape[2]])
        }
        LayerSpec::Dropout { rate } => {
            if !(0.0..1.0).contains(rate) {
                return Err(NnError::BadDropoutRate(*rate));
            }
            Ok(shape.to_vec())
        }
        LayerSpec::Flatten => Ok(vec![shape.iter().product()]),
        LayerSpec::Dense { units } => {
            if shape.len() != 1 {
                return Err(bad());
            }
            Ok(vec![*units])
        }
    }
}

/// He-style uniform initialization: `U(-sqrt(6 / fan_in), +sqrt(6 / fan_in))`
/// for weights, zeros for biases. Draw order is fixed (layer order, weights
/// row-major), so a seed pins every parameter bit.
pub(crate) fn initialize_layers(
    specs: &[LayerSpec],
    input_shape: &[usize],
    precision: Precision,
    seed: u64,
) -> Result<Vec<Layer>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shape = input_shape.to_vec();
    let mut layers = Vec::with_capacity(specs.len());
    for spec in specs {
        let next = output_shape(spec, &shape)?;
        let (weight, bias) = match spec {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
            } => {
                let in_c = shape[2];
                let fan_in = kernel.0 * kernel.1 * in_c;
                let w = he_uniform(
                    &mut rng,
                    vec![*out_channels, kernel.0, kernel.1, in_c],
                    fan_in,
                    precision,
                )?;
                let b = Tensor::zeros(vec![*out_channels], precision);
                (Some(w), Some(b))
            }
            LayerSpec::Dense { units } => {
                let fan_in = shape[0];
                let w = he_uniform(&mut rng, vec![*units, fan_in], fan_in, precision)?;
                let b = Tensor::zeros(vec![*units], precision);
                (Some(w), Some(b))
            }
            _ => (None, None),
        };
        layers.push(Layer {
            spec: spec.clone(),
            weight,
            bias,
        });
        shape = next;
    }
    Ok(layers)
}

fn he_uniform(
    rng: &mut ChaCha8Rng,
    shape: Vec<usize>,
    fan_in: usize,
    precision: Precision,
) -> Result<Tensor> {
    let limit = (6.0 / fan_in as f64).sqrt();
    let n: usize = shape.iter().product();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-limit..limit)).collect();
    let t = Tensor::from_f64(shape, raw)?;
    Ok(match precision {
        Precision::Double => t,
        Precision::Single => t.to_precision(Precision::Single),
    })
}
