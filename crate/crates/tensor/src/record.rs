//! Sequential computation records with retained activations.

use crate::error::TensorError;
use crate::ops::{log_clamp_epsilon, op_backward, op_forward, Aux, OpSpec, ParamGradient};
use crate::tensor::{Precision, Scalar, Tensor};
use crate::Result;

/// Activations and per-op extras captured by one forward pass.
pub(crate) struct TypedTrace<S> {
    input: Vec<S>,
    input_shape: Vec<usize>,
    /// `values[i]` is the output of `ops[i]`.
    values: Vec<(Vec<S>, Vec<usize>)>,
    aux: Vec<Aux<S>>,
}

pub(crate) enum TraceBox {
    F32(TypedTrace<f32>),
    F64(TypedTrace<f64>),
}

pub(crate) trait ScalarDispatch: Scalar {
    fn unbox(trace: &TraceBox) -> Option<&TypedTrace<Self>>;
    fn boxed(trace: TypedTrace<Self>) -> TraceBox;
}

impl ScalarDispatch for f32 {
    fn unbox(trace: &TraceBox) -> Option<&TypedTrace<f32>> {
        match trace {
            TraceBox::F32(t) => Some(t),
            TraceBox::F64(_) => None,
        }
    }

    fn boxed(trace: TypedTrace<f32>) -> TraceBox {
        TraceBox::F32(trace)
    }
}

impl ScalarDispatch for f64 {
    fn unbox(trace: &TraceBox) -> Option<&TypedTrace<f64>> {
        match trace {
            TraceBox::F64(t) => Some(t),
            TraceBox::F32(_) => None,
        }
    }

    fn boxed(trace: TypedTrace<f64>) -> TraceBox {
        TraceBox::F64(trace)
    }
}

/// Everything one reverse pass produces.
#[derive(Clone, Debug)]
pub struct BackwardOutput {
    /// Cross-entropy loss of the recorded forward pass against the target.
    pub loss: f64,
    /// Final probabilities of the forward pass.
    pub probabilities: Tensor,
    /// Gradient of the loss with respect to the record input.
    pub input_gradient: Tensor,
    /// Gradient of the loss with respect to the softmax input (the logits).
    pub logit_gradient: Tensor,
    /// Aligned with the record's ops; `Some` only for parameterized ops.
    pub param_gradients: Vec<Option<ParamGradient>>,
}

/// An ordered list of primitive ops plus the retained activations of the most
/// recent forward pass.
///
/// A record is confined to one thread for a forward/backward pair. Distinct
/// records over shared read-only weight tensors may run in parallel.
pub struct ComputationRecord {
    ops: Vec<OpSpec>,
    precision: Precision,
    trace: Option<TraceBox>,
}

impl ComputationRecord {
    /// Builds a record, validating op parameters against the precision.
    pub fn new(ops: Vec<OpSpec>, precision: Precision) -> Result<Self> {
        for (index, op) in ops.iter().enumerate() {
            op.validate(index, precision)?;
        }
        Ok(Self {
            ops,
            precision,
            trace: None,
        })
    }

    pub fn ops(&self) -> &[OpSpec] {
        &self.ops
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn has_trace(&self) -> bool {
        self.trace.is_some()
    }

    /// Runs the ops in order, retaining all intermediate activations, and
    /// returns the final op output (the input itself for an empty record).
    pub fn forward(&mut self, input: &Tensor) -> Result<Tensor> {
        match self.precision {
            Precision::Single => self.forward_typed::<f32>(input),
            Precision::Double => self.forward_typed::<f64>(input),
        }
    }

    /// Stateless forward pass: evaluates without touching the saved trace.
    pub fn evaluate(&self, input: &Tensor) -> Result<Tensor> {
        match self.precision {
            Precision::Single => self.evaluate_typed::<f32>(input),
            Precision::Double => self.evaluate_typed::<f64>(input),
        }
    }

    /// Gradient of the cross-entropy loss (against `loss_target`, applied to
    /// the record's final softmax output) with respect to the input.
    ///
    /// Requires that [`ComputationRecord::forward`] already ran for exactly
    /// this input; the retained activations are reused.
    pub fn gradient_wrt_input(&mut self, input: &Tensor, loss_target: &Tensor) -> Result<Tensor> {
        match &self.trace {
            None => return Err(TensorError::BackwardBeforeForward),
            Some(trace) => {
                let matches = match (trace, input.precision()) {
                    (TraceBox::F32(t), Precision::Single) => {
                        t.input_shape == input.shape() && t.input == input.as_f32()?
                    }
                    (TraceBox::F64(t), Precision::Double) => {
                        t.input_shape == input.shape() && t.input == input.as_f64()?
                    }
                    _ => false,
                };
                if !matches {
                    return Err(TensorError::StaleTrace);
                }
            }
        }
        Ok(self.backward_loss(input, loss_target)?.input_gradient)
    }

    /// Full reverse pass for the cross-entropy loss against `loss_target`.
    ///
    /// The record must end with a softmax op; the loss gradient at the softmax
    /// input is the fused form `(P - Y) / T`, evaluated in the record's
    /// precision. Runs the forward pass first when no matching trace exists.
    pub fn backward_loss(&mut self, input: &Tensor, loss_target: &Tensor) -> Result<BackwardOutput> {
        match self.precision {
            Precision::Single => self.backward_loss_typed::<f32>(input, loss_target),
            Precision::Double => self.backward_loss_typed::<f64>(input, loss_target),
        }
    }

    /// Pulls an arbitrary cotangent on the final op output back to the input.
    ///
    /// Unlike [`ComputationRecord::backward_loss`] this treats a trailing
    /// softmax as an ordinary op (full Jacobian backward), which is what
    /// attacks reading probabilities or raw logits need.
    pub fn output_backward(&mut self, input: &Tensor, cotangent: &Tensor) -> Result<Tensor> {
        match self.precision {
            Precision::Single => self.output_backward_typed::<f32>(input, cotangent),
            Precision::Double => self.output_backward_typed::<f64>(input, cotangent),
        }
    }

    /// Cross-entropy loss of the record's softmax output against `target`,
    /// evaluated statelessly (used by the finite-difference oracle).
    pub fn loss_value(&self, input: &Tensor, target: &Tensor) -> Result<f64> {
        match self.precision {
            Precision::Single => self.loss_value_typed::<f32>(input, target),
            Precision::Double => self.loss_value_typed::<f64>(input, target),
        }
    }

    fn check_input<S: Scalar>(&self, input: &Tensor) -> Result<()> {
        if input.precision() != self.precision {
            return Err(TensorError::PrecisionMismatch {
                expected: self.precision,
                actual: input.precision(),
            });
        }
        debug_assert_eq!(S::PRECISION, self.precision);
        Ok(())
    }

    fn run_ops<S: Scalar>(&self, input: &Tensor) -> Result<TypedTrace<S>> {
        self.check_input::<S>(input)?;
        let x = S::slice(input)?;
        let mut values: Vec<(Vec<S>, Vec<usize>)> = Vec::with_capacity(self.ops.len());
        let mut aux = Vec::with_capacity(self.ops.len());
        let mut cur: &[S] = x;
        let mut cur_shape: &[usize] = input.shape();
        for (index, op) in self.ops.iter().enumerate() {
            let (y, shape, a) = op_forward(op, index, cur, cur_shape)?;
            values.push((y, shape));
            aux.push(a);
            let last = values.last().expect("just pushed");
            cur = &last.0;
            cur_shape = &last.1;
        }
        Ok(TypedTrace {
            input: x.to_vec(),
            input_shape: input.shape().to_vec(),
            values,
            aux,
        })
    }

    fn forward_typed<S: ScalarDispatch>(&mut self, input: &Tensor) -> Result<Tensor> {
        let trace = self.run_ops::<S>(input)?;
        let out = match trace.values.last() {
            Some((data, shape)) => S::tensor(shape.clone(), data.clone()),
            None => input.clone(),
        };
        self.trace = Some(S::boxed(trace));
        Ok(out)
    }

    fn evaluate_typed<S: Scalar>(&self, input: &Tensor) -> Result<Tensor> {
        self.check_input::<S>(input)?;
        let mut cur = S::slice(input)?.to_vec();
        let mut cur_shape = input.shape().to_vec();
        for (index, op) in self.ops.iter().enumerate() {
            let (y, shape, _) = op_forward(op, index, &cur, &cur_shape)?;
            cur = y;
            cur_shape = shape;
        }
        Ok(S::tensor(cur_shape, cur))
    }

    fn loss_value_typed<S: Scalar>(&self, input: &Tensor, target: &Tensor) -> Result<f64> {
        let out = self.evaluate_typed::<S>(input)?;
        if !matches!(self.ops.last(), Some(OpSpec::SoftmaxT { .. })) {
            return Err(TensorError::MissingProbabilityHead);
        }
        cross_entropy_value(S::slice(&out)?, S::slice(target)?)
    }

    fn ensure_trace<S: ScalarDispatch>(&mut self, input: &Tensor) -> Result<()> {
        let fresh = match &self.trace {
            Some(boxed) => match S::unbox(boxed) {
                Some(t) => t.input_shape == input.shape() && t.input == S::slice(input)?,
                None => false,
            },
            None => false,
        };
        if !fresh {
            self.forward_typed::<S>(input)?;
        }
        Ok(())
    }

    fn backward_loss_typed<S: ScalarDispatch>(
        &mut self,
        input: &Tensor,
        loss_target: &Tensor,
    ) -> Result<BackwardOutput> {
        self.check_input::<S>(input)?;
        let softmax_at = match self.ops.last() {
            Some(OpSpec::SoftmaxT { temperature }) => (self.ops.len() - 1, *temperature),
            _ => return Err(TensorError::MissingProbabilityHead),
        };
        self.ensure_trace::<S>(input)?;
        let trace = S::unbox(self.trace.as_ref().expect("trace just ensured"))
            .expect("trace precision matches record");

        let (probs, probs_shape) = trace.values.last().expect("record ends with softmax");
        let target = S::slice(loss_target)?;
        if target.len() != probs.len() {
            return Err(TensorError::TargetLength {
                target: target.len(),
                output: probs.len(),
            });
        }
        let loss = cross_entropy_value(probs, target)?;

        // Fused loss-through-softmax gradient at the logits: (P - Y) / T.
        // Computing it from the forward probabilities rather than through the
        // softmax Jacobian keeps the saturated limits exact in the working
        // precision.
        let t = S::from_f64(softmax_at.1);
        let seed: Vec<S> = probs
            .iter()
            .zip(target)
            .map(|(&p, &y)| (p - y) / t)
            .collect();
        let logit_gradient = S::tensor(
            trace
                .values
                .get(softmax_at.0.wrapping_sub(1))
                .map(|(_, s)| s.clone())
                .unwrap_or_else(|| trace.input_shape.clone()),
            seed.clone(),
        );

        let (input_gradient, param_gradients) =
            walk_backward::<S>(&self.ops[..softmax_at.0], trace, seed)?;
        let mut padded = param_gradients;
        padded.push(None); // the softmax head holds no parameters

        Ok(BackwardOutput {
            loss,
            probabilities: S::tensor(probs_shape.clone(), probs.clone()),
            input_gradient,
            logit_gradient,
            param_gradients: padded,
        })
    }

    fn output_backward_typed<S: ScalarDispatch>(
        &mut self,
        input: &Tensor,
        cotangent: &Tensor,
    ) -> Result<Tensor> {
        self.check_input::<S>(input)?;
        self.ensure_trace::<S>(input)?;
        let trace = S::unbox(self.trace.as_ref().expect("trace just ensured"))
            .expect("trace precision matches record");
        let out_len = trace
            .values
            .last()
            .map(|(v, _)| v.len())
            .unwrap_or(trace.input.len());
        let seed = S::slice(cotangent)?;
        if seed.len() != out_len {
            return Err(TensorError::TargetLength {
                target: seed.len(),
                output: out_len,
            });
        }
        let (gx, _) = walk_backward::<S>(&self.ops, trace, seed.to_vec())?;
        Ok(gx)
    }
}

/// Walks `ops` in exact reverse order, starting from `seed` as the cotangent
/// of the last listed op's output.
fn walk_backward<S: Scalar>(
    ops: &[OpSpec],
    trace: &TypedTrace<S>,
    seed: Vec<S>,
) -> Result<(Tensor, Vec<Option<ParamGradient>>)> {
    let mut grad = seed;
    let mut param_gradients: Vec<Option<ParamGradient>> = vec![None; ops.len()];
    for index in (0..ops.len()).rev() {
        let (x, in_shape) = if index == 0 {
            (trace.input.as_slice(), trace.input_shape.as_slice())
        } else {
            let (v, s) = &trace.values[index - 1];
            (v.as_slice(), s.as_slice())
        };
        let (y, _) = &trace.values[index];
        let (gx, params) = op_backward(&ops[index], x, in_shape, y, &trace.aux[index], &grad)?;
        if let Some((gw, gb)) = params {
            let (weight, bias) = ops[index].params().expect("param grads imply params");
            param_gradients[index] = Some(ParamGradient {
                weight: S::tensor(weight.shape().to_vec(), gw),
                bias: S::tensor(bias.shape().to_vec(), gb),
            });
        }
        grad = gx;
    }
    Ok((S::tensor(trace.input_shape.clone(), grad), param_gradients))
}

/// `-sum(y_i * ln(max(p_i, eps)))`, evaluated in the buffer precision and
/// widened at the end. The clamp keeps saturated outputs finite; it applies to
/// the loss value only, never to the fused gradient.
fn cross_entropy_value<S: Scalar>(probs: &[S], target: &[S]) -> Result<f64> {
    if probs.len() != target.len() {
        return Err(TensorError::TargetLength {
            target: target.len(),
            output: probs.len(),
        });
    }
    let eps = S::from_f64(log_clamp_epsilon(S::PRECISION));
    let mut loss = S::zero();
    for (&p, &y) in probs.iter().zip(target) {
        if y != S::zero() {
            loss = loss - y * p.max(eps).ln();
        }
    }
    Ok(loss.to_f64())
}
