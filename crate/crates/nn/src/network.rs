//! The network type: an ordered layer list ending in a dense logits layer.

use gradlab_tensor::{
    BackwardOutput, ComputationRecord, OpSpec, ParamGradient, Precision, Tensor,
};

use crate::error::NnError;
use crate::layer::{initialize_layers, output_shape, Arch, Layer, LayerSpec};
use crate::Result;

/// Which output a cotangent is seeded against when pulling a gradient back to
/// the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputStage {
    /// The raw output of the final dense layer.
    Logits,
    /// The softmax output at the network's inference temperature.
    Probabilities,
}

/// An immutable-after-training feedforward classifier.
///
/// Concurrent read-only evaluation is safe; every evaluation builds its own
/// computation record over the shared weight tensors.
#[derive(Clone, Debug)]
pub struct Network {
    layers: Vec<Layer>,
    input_shape: [usize; 3],
    class_count: usize,
    inference_temperature: f64,
    training_temperature: f64,
    precision: Precision,
}

/// The reference convolutional architecture for 28x28 grayscale digits.
/// Rejects any other input shape.
pub fn build_reference_cnn(
    class_count: usize,
    input_shape: [usize; 3],
    precision: Precision,
    seed: u64,
) -> Result<Network> {
    if input_shape != [28, 28, 1] {
        return Err(NnError::UnsupportedInputShape(input_shape.to_vec()));
    }
    Network::new(
        &Arch::ReferenceCnn.layers(class_count),
        input_shape,
        class_count,
        precision,
        seed,
    )
}

/// A smaller architecture used as an alternate surrogate model.
pub fn build_compact_cnn(
    class_count: usize,
    input_shape: [usize; 3],
    precision: Precision,
    seed: u64,
) -> Result<Network> {
    Network::new(
        &Arch::CompactCnn.layers(class_count),
        input_shape,
        class_count,
        precision,
        seed,
    )
}

impl Network {
    /// Builds a network with freshly initialized weights. The final layer must
    /// be dense with `class_count` outputs.
    pub fn new(
        specs: &[LayerSpec],
        input_shape: [usize; 3],
        class_count: usize,
        precision: Precision,
        seed: u64,
    ) -> Result<Self> {
        let layers = initialize_layers(specs, &input_shape, precision, seed)?;
        let net = Self {
            layers,
            input_shape,
            class_count,
            inference_temperature: 1.0,
            training_temperature: 1.0,
            precision,
        };
        net.validate_logits_layer()?;
        Ok(net)
    }

    pub(crate) fn from_parts(
        layers: Vec<Layer>,
        input_shape: [usize; 3],
        class_count: usize,
        inference_temperature: f64,
        training_temperature: f64,
        precision: Precision,
    ) -> Result<Self> {
        let net = Self {
            layers,
            input_shape,
            class_count,
            inference_temperature,
            training_temperature,
            precision,
        };
        net.validate_logits_layer()?;
        Ok(net)
    }

    fn validate_logits_layer(&self) -> Result<()> {
        match self.layers.last() {
            Some(Layer {
                spec: LayerSpec::Dense { units },
                ..
            }) if *units == self.class_count => Ok(()),
            Some(Layer { spec, .. }) => Err(NnError::BadLogitsLayer {
                expected: self.class_count,
                actual: match spec {
                    LayerSpec::Dense { units } => *units,
                    _ => 0,
                },
            }),
            None => Err(NnError::BadLogitsLayer {
                expected: self.class_count,
                actual: 0,
            }),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn inference_temperature(&self) -> f64 {
        self.inference_temperature
    }

    pub fn set_inference_temperature(&mut self, t: f64) {
        self.inference_temperature = t;
    }

    pub fn training_temperature(&self) -> f64 {
        self.training_temperature
    }

    pub fn set_training_temperature(&mut self, t: f64) {
        self.training_temperature = t;
    }

    pub fn dropout_layer_count(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| matches!(l.spec, LayerSpec::Dropout { .. }))
            .count()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| {
                l.weight.as_ref().map_or(0, Tensor::len) + l.bias.as_ref().map_or(0, Tensor::len)
            })
            .sum()
    }

    fn layer_op(&self, layer: &Layer, dropout_mask: Option<Tensor>) -> OpSpec {
        match &layer.spec {
            LayerSpec::Conv2d { .. } => OpSpec::Conv2d {
                weight: layer.weight.clone().expect("conv layers hold weights"),
                bias: layer.bias.clone().expect("conv layers hold biases"),
            },
            LayerSpec::Dense { .. } => OpSpec::Dense {
                weight: layer.weight.clone().expect("dense layers hold weights"),
                bias: layer.bias.clone().expect("dense layers hold biases"),
            },
            LayerSpec::Relu => OpSpec::Relu,
            LayerSpec::MaxPool2x2 => OpSpec::MaxPool2x2,
            LayerSpec::Flatten => OpSpec::Flatten,
            LayerSpec::Dropout { .. } => OpSpec::Dropout { mask: dropout_mask },
        }
    }

    /// Record over the layers only: its output is the raw logits.
    pub fn logits_record(&self) -> Result<ComputationRecord> {
        let ops = self.layers.iter().map(|l| self.layer_op(l, None)).collect();
        Ok(ComputationRecord::new(ops, self.precision)?)
    }

    /// Inference record: layers (dropout as identity) plus a softmax head at
    /// the inference temperature.
    pub fn inference_record(&self) -> Result<ComputationRecord> {
        let mut ops: Vec<OpSpec> = self.layers.iter().map(|l| self.layer_op(l, None)).collect();
        ops.push(OpSpec::SoftmaxT {
            temperature: self.inference_temperature,
        });
        Ok(ComputationRecord::new(ops, self.precision)?)
    }

    /// Inference-mode record with an explicit softmax temperature, regardless
    /// of the network's stored inference temperature.
    pub fn record_at_temperature(&self, temperature: f64) -> Result<ComputationRecord> {
        let mut ops: Vec<OpSpec> = self.layers.iter().map(|l| self.layer_op(l, None)).collect();
        ops.push(OpSpec::SoftmaxT { temperature });
        Ok(ComputationRecord::new(ops, self.precision)?)
    }

    /// Training record: dropout layers consume the supplied masks (one per
    /// dropout layer, in order) and the softmax head runs at `temperature`.
    pub fn training_record(
        &self,
        temperature: f64,
        dropout_masks: &[Tensor],
    ) -> Result<ComputationRecord> {
        if dropout_masks.len() != self.dropout_layer_count() {
            return Err(NnError::LengthMismatch {
                left: dropout_masks.len(),
                right: self.dropout_layer_count(),
            });
        }
        let mut masks = dropout_masks.iter();
        let mut ops: Vec<OpSpec> = self
            .layers
            .iter()
            .map(|l| {
                let mask = if matches!(l.spec, LayerSpec::Dropout { .. }) {
                    masks.next().cloned()
                } else {
                    None
                };
                self.layer_op(l, mask)
            })
            .collect();
        ops.push(OpSpec::SoftmaxT { temperature });
        Ok(ComputationRecord::new(ops, self.precision)?)
    }

    /// Raw logits for one input.
    pub fn logits(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.logits_record()?.evaluate(input)?)
    }

    /// Softmax probabilities at the inference temperature.
    pub fn probabilities(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.inference_record()?.evaluate(input)?)
    }

    /// Predicted class: argmax of the logits, first maximum on ties.
    pub fn predict(&self, input: &Tensor) -> Result<usize> {
        let logits = self.logits(input)?;
        Ok(argmax(&logits.to_f64_vec()))
    }

    /// Full reverse pass of the inference-mode cross-entropy loss against a
    /// target distribution (one-hot or soft).
    pub fn loss_backward(&self, input: &Tensor, target: &Tensor) -> Result<BackwardOutput> {
        let mut record = self.inference_record()?;
        Ok(record.backward_loss(input, target)?)
    }

    /// Pulls a cotangent on the logits or on the probabilities back to the
    /// input, through the inference-mode network.
    pub fn output_gradient(
        &self,
        input: &Tensor,
        cotangent: &Tensor,
        stage: OutputStage,
    ) -> Result<Tensor> {
        let mut record = match stage {
            OutputStage::Logits => self.logits_record()?,
            OutputStage::Probabilities => self.inference_record()?,
        };
        Ok(record.output_backward(input, cotangent)?)
    }

    /// Gradient-descent update: `param -= scale * gradient` for every
    /// parameterized layer. `gradients` is aligned with the layer list (a
    /// trailing softmax entry from a training record is ignored).
    pub fn apply_gradient_step(
        &mut self,
        gradients: &[Option<ParamGradient>],
        scale: f64,
    ) -> Result<()> {
        for (layer, grad) in self.layers.iter_mut().zip(gradients) {
            let Some(grad) = grad else { continue };
            let weight = layer.weight.as_mut().expect("gradient implies parameters");
            let bias = layer.bias.as_mut().expect("gradient implies parameters");
            match self.precision {
                Precision::Single => {
                    let gw = grad.weight.as_f32()?.to_vec();
                    let gb = grad.bias.as_f32()?.to_vec();
                    let s = scale as f32;
                    weight.map_mut_f32(|w| {
                        for (v, g) in w.iter_mut().zip(&gw) {
                            *v -= s * g;
                        }
                    })?;
                    bias.map_mut_f32(|b| {
                        for (v, g) in b.iter_mut().zip(&gb) {
                            *v -= s * g;
                        }
                    })?;
                }
                Precision::Double => {
                    let gw = grad.weight.as_f64()?.to_vec();
                    let gb = grad.bias.as_f64()?.to_vec();
                    weight.map_mut_f64(|w| {
                        for (v, g) in w.iter_mut().zip(&gw) {
                            *v -= scale * g;
                        }
                    })?;
                    bias.map_mut_f64(|b| {
                        for (v, g) in b.iter_mut().zip(&gb) {
                            *v -= scale * g;
                        }
                    })?;
                }
            }
        }
        Ok(())
    }

    /// Shape of every activation, input first, logits last.
    pub fn activation_shapes(&self) -> Result<Vec<Vec<usize>>> {
        let mut shapes = vec![self.input_shape.to_vec()];
        for layer in &self.layers {
            let next = output_shape(&layer.spec, shapes.last().expect("seeded with input"))?;
            shapes.push(next);
        }
        Ok(shapes)
    }
}

impl Arch {
    pub fn build(
        &self,
        class_count: usize,
        input_shape: [usize; 3],
        precision: Precision,
        seed: u64,
    ) -> Result<Network> {
        match self {
            Arch::ReferenceCnn => build_reference_cnn(class_count, input_shape, precision, seed),
            Arch::CompactCnn => build_compact_cnn(class_count, input_shape, precision, seed),
        }
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
