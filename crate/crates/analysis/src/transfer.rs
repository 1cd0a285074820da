//! Surrogate transfer: craft on one network, evaluate on another.

use gradlab_attacks::{fgsm, PerturbationBudget};
use gradlab_data::LabeledDataset;
use gradlab_nn::{Network, OneHotLabel};
use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct TransferOutcome {
    /// Fraction of crafted examples the victim misclassifies.
    pub transfer_rate: f64,
    /// Direct success rate on the surrogate itself, for reference.
    pub surrogate_success_rate: f64,
    pub samples: usize,
}

/// Crafts single-step gradient-sign examples against `surrogate` and measures
/// how often `victim` misclassifies them. With `victim == surrogate` this is
/// the direct success rate; at zero radius it is the victim's clean error.
pub fn transfer_experiment(
    surrogate: &Network,
    victim: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
    budget: &PerturbationBudget,
) -> Result<TransferOutcome> {
    if sample_ids.is_empty() {
        return Err(AnalysisError::EmptySampleSet);
    }
    let classes = surrogate.class_count();
    let outcomes = sample_ids
        .par_iter()
        .map(|&sample_id| -> Result<(bool, bool)> {
            let label = data.label(sample_id);
            let x = data.image(sample_id, surrogate.precision());
            let y = OneHotLabel::ground_truth(label, classes)?;
            let crafted = fgsm(surrogate, &x, &y, budget)?;
            let candidate = crafted.adversarial.to_precision(victim.precision());
            let fooled = victim.predict(&candidate)? != label;
            Ok((fooled, crafted.success))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = outcomes.len() as f64;
    Ok(TransferOutcome {
        transfer_rate: outcomes.iter().filter(|(fooled, _)| *fooled).count() as f64 / n,
        surrogate_success_rate: outcomes.iter().filter(|(_, direct)| *direct).count() as f64 / n,
        samples: outcomes.len(),
    })
}
