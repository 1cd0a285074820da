//! Primitive ops and their forward/backward kernels.
//!
//! Image activations are laid out `[height, width, channels]` row-major.
//! Convolutions are valid-padding, stride 1 only; other configurations are
//! rejected rather than silently approximated.

use ndarray::ArrayView2;

use crate::error::TensorError;
use crate::tensor::{Precision, Scalar, Tensor};
use crate::Result;

/// Gradients for one op's parameters, shaped like the parameters themselves.
#[derive(Clone, Debug)]
pub struct ParamGradient {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// One primitive op in a computation record.
#[derive(Clone, Debug)]
pub enum OpSpec {
    /// `y = W x + b`; weight `[out, in]`, bias `[out]`.
    Dense { weight: Tensor, bias: Tensor },
    /// Valid padding, stride 1; weight `[out_c, kh, kw, in_c]`, bias `[out_c]`.
    Conv2d { weight: Tensor, bias: Tensor },
    Relu,
    /// 2x2 window, stride 2; ties resolve to the first element in scan order.
    MaxPool2x2,
    Flatten,
    /// `mask == None` is the inference identity. A training mask holds
    /// `0` or `1/keep_rate` per activation.
    Dropout { mask: Option<Tensor> },
    /// Stabilized `softmax(z / temperature)` over a vector.
    SoftmaxT { temperature: f64 },
}

impl OpSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OpSpec::Dense { .. } => "dense",
            OpSpec::Conv2d { .. } => "conv2d",
            OpSpec::Relu => "relu",
            OpSpec::MaxPool2x2 => "maxpool2x2",
            OpSpec::Flatten => "flatten",
            OpSpec::Dropout { .. } => "dropout",
            OpSpec::SoftmaxT { .. } => "softmax-t",
        }
    }

    pub fn params(&self) -> Option<(&Tensor, &Tensor)> {
        match self {
            OpSpec::Dense { weight, bias } | OpSpec::Conv2d { weight, bias } => {
                Some((weight, bias))
            }
            _ => None,
        }
    }

    pub(crate) fn validate(&self, index: usize, precision: Precision) -> Result<()> {
        let check_precision = |t: &Tensor| -> Result<()> {
            if t.precision() != precision {
                return Err(TensorError::PrecisionMismatch {
                    expected: precision,
                    actual: t.precision(),
                });
            }
            Ok(())
        };
        match self {
            OpSpec::Dense { weight, bias } => {
                check_precision(weight)?;
                check_precision(bias)?;
                if weight.shape().len() != 2 {
                    return Err(invalid(index, self, "dense weight must be 2-D [out, in]"));
                }
                if bias.shape() != [weight.shape()[0]] {
                    return Err(invalid(index, self, "dense bias must be 1-D [out]"));
                }
            }
            OpSpec::Conv2d { weight, bias } => {
                check_precision(weight)?;
                check_precision(bias)?;
                if weight.shape().len() != 4 {
                    return Err(invalid(
                        index,
                        self,
                        "conv weight must be 4-D [out_c, kh, kw, in_c]",
                    ));
                }
                if bias.shape() != [weight.shape()[0]] {
                    return Err(invalid(index, self, "conv bias must be 1-D [out_c]"));
                }
            }
            OpSpec::Dropout { mask: Some(mask) } => check_precision(mask)?,
            OpSpec::SoftmaxT { temperature } => {
                if !(temperature.is_finite() && *temperature > 0.0) {
                    return Err(invalid(index, self, "temperature must be positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Per-op data saved by the forward pass beyond the activation itself.
pub(crate) enum Aux<S> {
    None,
    /// Flat input index of each pooled maximum.
    Pool(Vec<u32>),
    /// The im2col matrix, `[oh * ow, kh * kw * in_c]` row-major.
    Cols(Vec<S>),
}

fn invalid(index: usize, op: &OpSpec, reason: &str) -> TensorError {
    TensorError::InvalidOp {
        index,
        op: op.name(),
        reason: reason.to_string(),
    }
}

fn shape_err(index: usize, op: &OpSpec, shape: &[usize], reason: impl Into<String>) -> TensorError {
    TensorError::ShapeMismatch {
        index,
        op: op.name(),
        shape: shape.to_vec(),
        reason: reason.into(),
    }
}

fn image_dims(index: usize, op: &OpSpec, shape: &[usize]) -> Result<(usize, usize, usize)> {
    if shape.len() != 3 {
        return Err(shape_err(index, op, shape, "expected [h, w, c]"));
    }
    Ok((shape[0], shape[1], shape[2]))
}

fn view2<S: Scalar>(data: &[S], rows: usize, cols: usize) -> ArrayView2<'_, S> {
    ArrayView2::from_shape((rows, cols), data).expect("kernel shape bookkeeping")
}

pub(crate) fn op_forward<S: Scalar>(
    op: &OpSpec,
    index: usize,
    x: &[S],
    shape: &[usize],
) -> Result<(Vec<S>, Vec<usize>, Aux<S>)> {
    match op {
        OpSpec::Dense { weight, bias } => {
            let (out, input) = (weight.shape()[0], weight.shape()[1]);
            if shape.len() != 1 || shape[0] != input {
                return Err(shape_err(index, op, shape, format!("expected [{input}]")));
            }
            let wv = view2(S::slice(weight)?, out, input);
            let xv = ndarray::ArrayView1::from(x);
            let mut y = wv.dot(&xv).into_raw_vec_and_offset().0;
            for (v, &b) in y.iter_mut().zip(S::slice(bias)?) {
                *v = *v + b;
            }
            Ok((y, vec![out], Aux::None))
        }
        OpSpec::Conv2d { weight, bias } => {
            let (h, w, c) = image_dims(index, op, shape)?;
            let ws = weight.shape();
            let (oc, kh, kw, ic) = (ws[0], ws[1], ws[2], ws[3]);
            if ic != c {
                return Err(shape_err(
                    index,
                    op,
                    shape,
                    format!("input has {c} channels, kernel expects {ic}"),
                ));
            }
            if h < kh || w < kw {
                return Err(shape_err(
                    index,
                    op,
                    shape,
                    format!("spatial dims smaller than {kh}x{kw} kernel"),
                ));
            }
            let (oh, ow) = (h - kh + 1, w - kw + 1);
            let k = kh * kw * c;
            let mut cols = vec![S::zero(); oh * ow * k];
            for oy in 0..oh {
                for ox in 0..ow {
                    let row = (oy * ow + ox) * k;
                    for ky in 0..kh {
                        let src = ((oy + ky) * w + ox) * c;
                        let dst = row + ky * kw * c;
                        cols[dst..dst + kw * c].copy_from_slice(&x[src..src + kw * c]);
                    }
                }
            }
            let wv = view2(S::slice(weight)?, oc, k);
            let cv = view2(&cols, oh * ow, k);
            let mut y = cv.dot(&wv.t()).into_raw_vec_and_offset().0;
            let bv = S::slice(bias)?;
            for row in y.chunks_exact_mut(oc) {
                for (v, &b) in row.iter_mut().zip(bv) {
                    *v = *v + b;
                }
            }
            Ok((y, vec![oh, ow, oc], Aux::Cols(cols)))
        }
        OpSpec::Relu => {
            let y = x
                .iter()
                .map(|&v| if v > S::zero() { v } else { S::zero() })
                .collect();
            Ok((y, shape.to_vec(), Aux::None))
        }
        OpSpec::MaxPool2x2 => {
            let (h, w, c) = image_dims(index, op, shape)?;
            if h % 2 != 0 || w % 2 != 0 {
                return Err(shape_err(index, op, shape, "spatial dims must be even"));
            }
            let (oh, ow) = (h / 2, w / 2);
            let mut y = vec![S::zero(); oh * ow * c];
            let mut argmax = vec![0u32; oh * ow * c];
            for oy in 0..oh {
                for ox in 0..ow {
                    for ch in 0..c {
                        let mut best = S::neg_infinity();
                        let mut best_idx = 0usize;
                        for dy in 0..2 {
                            for dx in 0..2 {
                                let idx = ((oy * 2 + dy) * w + ox * 2 + dx) * c + ch;
                                if x[idx] > best {
                                    best = x[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        let out = (oy * ow + ox) * c + ch;
                        y[out] = best;
                        argmax[out] = best_idx as u32;
                    }
                }
            }
            Ok((y, vec![oh, ow, c], Aux::Pool(argmax)))
        }
        OpSpec::Flatten => Ok((x.to_vec(), vec![x.len()], Aux::None)),
        OpSpec::Dropout { mask } => match mask {
            None => Ok((x.to_vec(), shape.to_vec(), Aux::None)),
            Some(mask) => {
                if mask.len() != x.len() {
                    return Err(shape_err(
                        index,
                        op,
                        shape,
                        format!("mask holds {} entries", mask.len()),
                    ));
                }
                let mv = S::slice(mask)?;
                let y = x.iter().zip(mv).map(|(&v, &m)| v * m).collect();
                Ok((y, shape.to_vec(), Aux::None))
            }
        },
        OpSpec::SoftmaxT { temperature } => {
            if shape.len() != 1 {
                return Err(shape_err(index, op, shape, "expected a logit vector"));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(invalid(index, op, "non-finite input"));
            }
            let t = S::from_f64(*temperature);
            let max = x.iter().cloned().fold(S::neg_infinity(), S::max);
            let mut y: Vec<S> = x.iter().map(|&v| ((v - max) / t).exp()).collect();
            let sum: S = y.iter().cloned().sum();
            for v in &mut y {
                *v = *v / sum;
            }
            Ok((y, shape.to_vec(), Aux::None))
        }
    }
}

pub(crate) fn op_backward<S: Scalar>(
    op: &OpSpec,
    x: &[S],
    in_shape: &[usize],
    y: &[S],
    aux: &Aux<S>,
    gy: &[S],
) -> Result<(Vec<S>, Option<(Vec<S>, Vec<S>)>)> {
    match op {
        OpSpec::Dense { weight, .. } => {
            let (out, input) = (weight.shape()[0], weight.shape()[1]);
            let wv = view2(S::slice(weight)?, out, input);
            let gyv = ndarray::ArrayView1::from(gy);
            let gx = wv.t().dot(&gyv).into_raw_vec_and_offset().0;
            let gw = view2(gy, out, 1)
                .dot(&view2(x, 1, input))
                .into_raw_vec_and_offset()
                .0;
            Ok((gx, Some((gw, gy.to_vec()))))
        }
        OpSpec::Conv2d { weight, .. } => {
            let Aux::Cols(cols) = aux else {
                unreachable!("conv2d forward always saves its im2col matrix");
            };
            let (h, w, c) = (in_shape[0], in_shape[1], in_shape[2]);
            let ws = weight.shape();
            let (oc, kh, kw) = (ws[0], ws[1], ws[2]);
            let (oh, ow) = (h - kh + 1, w - kw + 1);
            let k = kh * kw * c;
            let gyv = view2(gy, oh * ow, oc);
            let wv = view2(S::slice(weight)?, oc, k);
            let gcols = gyv.dot(&wv).into_raw_vec_and_offset().0;
            let mut gx = vec![S::zero(); x.len()];
            for oy in 0..oh {
                for ox in 0..ow {
                    let row = (oy * ow + ox) * k;
                    for ky in 0..kh {
                        let dst = ((oy + ky) * w + ox) * c;
                        let src = row + ky * kw * c;
                        for i in 0..kw * c {
                            gx[dst + i] = gx[dst + i] + gcols[src + i];
                        }
                    }
                }
            }
            let gw = gyv
                .t()
                .dot(&view2(cols, oh * ow, k))
                .into_raw_vec_and_offset()
                .0;
            let mut gb = vec![S::zero(); oc];
            for row in gy.chunks_exact(oc) {
                for (b, &g) in gb.iter_mut().zip(row) {
                    *b = *b + g;
                }
            }
            Ok((gx, Some((gw, gb))))
        }
        OpSpec::Relu => {
            let gx = x
                .iter()
                .zip(gy)
                .map(|(&v, &g)| if v > S::zero() { g } else { S::zero() })
                .collect();
            Ok((gx, None))
        }
        OpSpec::MaxPool2x2 => {
            let Aux::Pool(argmax) = aux else {
                unreachable!("maxpool forward always saves its argmax indices");
            };
            let mut gx = vec![S::zero(); x.len()];
            for (&idx, &g) in argmax.iter().zip(gy) {
                gx[idx as usize] = gx[idx as usize] + g;
            }
            Ok((gx, None))
        }
        OpSpec::Flatten => Ok((gy.to_vec(), None)),
        OpSpec::Dropout { mask } => match mask {
            None => Ok((gy.to_vec(), None)),
            Some(mask) => {
                let mv = S::slice(mask)?;
                let gx = gy.iter().zip(mv).map(|(&g, &m)| g * m).collect();
                Ok((gx, None))
            }
        },
        OpSpec::SoftmaxT { temperature } => {
            let t = S::from_f64(*temperature);
            let dot: S = gy.iter().zip(y).map(|(&g, &p)| g * p).sum();
            let gx = y.iter().zip(gy).map(|(&p, &g)| p * (g - dot) / t).collect();
            Ok((gx, None))
        }
    }
}

/// Lower clamp applied to probabilities inside the log of the cross-entropy
/// loss, keeping saturated outputs finite.
pub fn log_clamp_epsilon(precision: Precision) -> f64 {
    match precision {
        Precision::Single => 1e-7,
        Precision::Double => 1e-12,
    }
}
