//! The temperature softmax and its analytic Jacobian.

use gradlab_tensor::{Precision, Scalar, Tensor};

use crate::error::NnError;
use crate::Result;

/// `softmax(z / T)`, computed with max-subtraction so that the amplified
/// logits a distilled network produces do not overflow the exponential.
///
/// Output entries are nonnegative and sum to 1 (to rounding). In single
/// precision a sufficiently large logit gap saturates the output to exactly
/// 0/1; that behaviour is intentional and measured elsewhere.
pub fn temperature_softmax(logits: &Tensor, temperature: f64) -> Result<Tensor> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(NnError::BadTemperature(temperature));
    }
    match logits.precision() {
        Precision::Single => softmax_typed::<f32>(logits, temperature),
        Precision::Double => softmax_typed::<f64>(logits, temperature),
    }
}

fn softmax_typed<S: Scalar>(logits: &Tensor, temperature: f64) -> Result<Tensor> {
    let z = S::slice(logits)?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(NnError::NonFiniteLogits);
    }
    let t = S::from_f64(temperature);
    let max = z.iter().cloned().fold(S::neg_infinity(), S::max);
    let mut p: Vec<S> = z.iter().map(|&v| ((v - max) / t).exp()).collect();
    let sum: S = p.iter().cloned().sum();
    for v in &mut p {
        *v = *v / sum;
    }
    Ok(S::tensor(logits.shape().to_vec(), p))
}

/// The softmax derivative matrix at probabilities `p`:
/// `J[i][j] = p_i (1 - p_j)` on the diagonal and `-p_i p_j` off it.
///
/// Every row sums to zero and the matrix is symmetric.
pub fn softmax_jacobian(probabilities: &Tensor) -> Result<Tensor> {
    validate_probabilities(probabilities)?;
    let p = probabilities.to_f64_vec();
    let n = p.len();
    let mut jac = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            jac[i * n + j] = if i == j {
                p[i] * (1.0 - p[j])
            } else {
                -p[i] * p[j]
            };
        }
    }
    let out = Tensor::from_f64(vec![n, n], jac)?;
    Ok(match probabilities.precision() {
        Precision::Single => out.to_precision(Precision::Single),
        Precision::Double => out,
    })
}

pub(crate) fn validate_probabilities(p: &Tensor) -> Result<()> {
    if p.shape().len() != 1 || p.is_empty() {
        return Err(NnError::NotProbabilities(format!(
            "expected a nonempty vector, got shape {:?}",
            p.shape()
        )));
    }
    let v = p.to_f64_vec();
    if v.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0 + 1e-6) {
        return Err(NnError::NotProbabilities(
            "entries must lie in [0, 1]".to_string(),
        ));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > 1e-4 {
        return Err(NnError::NotProbabilities(format!("entries sum to {sum}")));
    }
    Ok(())
}
