//! Central finite differences, the independent gradient oracle.
//!
//! Everything here runs in double precision only; the oracle exists to check
//! the reverse-mode path, so it must not inherit single-precision rounding.

use crate::error::TensorError;
use crate::record::ComputationRecord;
use crate::tensor::{Precision, Tensor};
use crate::Result;

/// Central-difference gradient of an arbitrary scalar field:
/// `(f(x + h e_i) - f(x - h e_i)) / 2h` per coordinate.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Result<Vec<f64>> {
    check_step(step)?;
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let plus = f(&probe);
        probe[i] = x[i] - step;
        let minus = f(&probe);
        probe[i] = x[i];
        grad[i] = (plus - minus) / (2.0 * step);
    }
    Ok(grad)
}

/// Central-difference estimate of the record's cross-entropy loss gradient
/// with respect to the input. Rejects single-precision inputs.
pub fn finite_difference_gradient(
    record: &ComputationRecord,
    input: &Tensor,
    loss_target: &Tensor,
    step: f64,
) -> Result<Tensor> {
    check_step(step)?;
    if input.precision() != Precision::Double {
        return Err(TensorError::OracleNeedsDouble(input.precision()));
    }
    if record.precision() != Precision::Double {
        return Err(TensorError::OracleNeedsDouble(record.precision()));
    }
    let x = input.as_f64()?;
    let shape = input.shape().to_vec();
    let grad = central_difference(
        |probe| {
            let t = Tensor::from_f64(shape.clone(), probe.to_vec()).expect("probe matches shape");
            record
                .loss_value(&t, loss_target)
                .expect("loss evaluation on a perturbed input")
        },
        x,
        step,
    )?;
    Tensor::from_f64(input.shape().to_vec(), grad)
}

fn check_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(TensorError::InvalidStep(step));
    }
    Ok(())
}
