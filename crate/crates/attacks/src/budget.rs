use crate::error::AttackError;
use crate::Result;

/// Distance metric an attack's perturbation is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Count of changed features.
    L0,
    L2,
    Linf,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L0 => "L0",
            NormKind::L2 => "L2",
            NormKind::Linf => "Linf",
        }
    }
}

/// Attack constraint record: radius, per-iteration step, and iteration cap.
/// Inputs are assumed scaled to `[0, 1]`, so the radius is in input units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationBudget {
    pub norm: NormKind,
    pub epsilon: f64,
    pub step: f64,
    pub max_iters: usize,
}

impl PerturbationBudget {
    /// Validates `epsilon >= 0` and, for iterative budgets, the radius
    /// decomposition `epsilon == max_iters * step`.
    pub fn new(norm: NormKind, epsilon: f64, step: f64, max_iters: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(AttackError::BadBudget(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        if max_iters > 1 {
            let implied = max_iters as f64 * step;
            if (implied - epsilon).abs() > 1e-9 * epsilon.max(1.0) {
                return Err(AttackError::BadBudget(format!(
                    "iterative budgets need epsilon == max_iters * step, got {epsilon} != {max_iters} * {step}"
                )));
            }
        }
        Ok(Self {
            norm,
            epsilon,
            step,
            max_iters,
        })
    }

    /// One full-radius step under the infinity norm.
    pub fn single_step(epsilon: f64) -> Result<Self> {
        Self::new(NormKind::Linf, epsilon, epsilon, 1)
    }

    /// `max_iters` steps of `epsilon / max_iters` under the infinity norm.
    pub fn iterative(epsilon: f64, max_iters: usize) -> Result<Self> {
        let iters = max_iters.max(1);
        Self::new(NormKind::Linf, epsilon, epsilon / iters as f64, iters)
    }
}
