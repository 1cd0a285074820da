use gradlab_tensor::Tensor;

use crate::cw::CwTrial;

/// Outcome of one attack on one sample.
#[derive(Clone, Debug)]
pub struct AttackResult {
    /// The candidate input, always inside the `[0, 1]` box.
    pub adversarial: Tensor,
    /// Misclassification for non-targeted attacks, target hit for targeted
    /// ones; always recomputed by evaluating the network on `adversarial`.
    pub success: bool,
    pub predicted_label: usize,
    /// Absent for non-targeted attacks.
    pub target_label: Option<usize>,
    pub iterations_used: usize,
    /// Perturbation size under the attack's own metric.
    pub achieved_norm: f64,
    /// The loss gradient at the clean input was exactly zero in the working
    /// precision, so gradient-sign steps could not move.
    pub masked_gradient: bool,
    /// Saliency attack only: the pair search ran out of usable feature pairs
    /// before hitting the feature budget. A result state, not an error.
    pub premature_termination: bool,
    /// Constant-search history for the optimization attack, kept whether or
    /// not any constant succeeded.
    pub search_trace: Option<Vec<CwTrial>>,
}
