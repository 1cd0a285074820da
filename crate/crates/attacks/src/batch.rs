//! Running one attack over a sample set, with CSV emission.

use gradlab_data::LabeledDataset;
use gradlab_nn::{Network, OneHotLabel};
use rayon::prelude::*;

use crate::budget::PerturbationBudget;
use crate::cw::{cw_l2, CwConfig};
use crate::error::AttackError;
use crate::gradient_sign::{bim, fgsm, targeted_bim, tgsm};
use crate::jsma::{jsma, JsmaConfig};
use crate::result::AttackResult;
use crate::Result;

#[derive(Clone, Debug)]
pub enum AttackSpec {
    Fgsm { budget: PerturbationBudget },
    Bim { budget: PerturbationBudget },
    Tgsm { budget: PerturbationBudget },
    TargetedBim { budget: PerturbationBudget },
    Jsma { config: JsmaConfig },
    CwL2 { config: CwConfig },
}

impl AttackSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::Fgsm { .. } => "fgsm",
            AttackSpec::Bim { .. } => "bim",
            AttackSpec::Tgsm { .. } => "tgsm",
            AttackSpec::TargetedBim { .. } => "targeted-bim",
            AttackSpec::Jsma { .. } => "jsma",
            AttackSpec::CwL2 { .. } => "cw-l2",
        }
    }

    pub fn is_targeted(&self) -> bool {
        matches!(
            self,
            AttackSpec::Tgsm { .. }
                | AttackSpec::TargetedBim { .. }
                | AttackSpec::Jsma { .. }
                | AttackSpec::CwL2 { .. }
        )
    }
}

/// How targeted attacks pick their target class.
#[derive(Clone, Copy, Debug)]
pub enum TargetPolicy {
    /// The other class of a two-class network.
    OtherBinary,
    /// A fixed class; samples already labeled with it are skipped.
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub struct BatchItem {
    pub sample_id: usize,
    pub true_label: usize,
    pub result: AttackResult,
}

/// Attacks every listed sample independently (samples run in parallel over
/// the shared immutable network) and returns per-sample outcomes in
/// `sample_ids` order. Targeted attacks require a target policy.
pub fn run_batch(
    net: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
    spec: &AttackSpec,
    policy: Option<TargetPolicy>,
) -> Result<Vec<BatchItem>> {
    if spec.is_targeted() {
        match policy {
            None => return Err(AttackError::MissingTargetPolicy),
            Some(TargetPolicy::OtherBinary) if net.class_count() != 2 => {
                return Err(AttackError::BinaryPolicyNeedsTwoClasses(net.class_count()))
            }
            Some(TargetPolicy::Fixed(k)) if k >= net.class_count() => {
                return Err(AttackError::TargetOutOfRange {
                    target: k,
                    classes: net.class_count(),
                })
            }
            _ => {}
        }
    }
    let classes = net.class_count();
    let precision = net.precision();

    let items = sample_ids
        .par_iter()
        .map(|&sample_id| -> Result<Option<BatchItem>> {
            let true_label = data.label(sample_id);
            let x = data.image(sample_id, precision);
            let target_index = match (spec.is_targeted(), policy) {
                (false, _) => None,
                (true, Some(TargetPolicy::OtherBinary)) => Some(1 - true_label),
                (true, Some(TargetPolicy::Fixed(k))) => {
                    if k == true_label {
                        return Ok(None); // target must differ from the truth
                    }
                    Some(k)
                }
                (true, None) => unreachable!("validated above"),
            };
            let result = match spec {
                AttackSpec::Fgsm { budget } => {
                    let y = OneHotLabel::ground_truth(true_label, classes)?;
                    fgsm(net, &x, &y, budget)?
                }
                AttackSpec::Bim { budget } => {
                    let y = OneHotLabel::ground_truth(true_label, classes)?;
                    bim(net, &x, &y, budget)?
                }
                AttackSpec::Tgsm { budget } => {
                    let t = OneHotLabel::attack_target(target_index.unwrap(), classes)?;
                    tgsm(net, &x, &t, budget)?
                }
                AttackSpec::TargetedBim { budget } => {
                    let t = OneHotLabel::attack_target(target_index.unwrap(), classes)?;
                    targeted_bim(net, &x, &t, budget)?
                }
                AttackSpec::Jsma { config } => {
                    let t = OneHotLabel::attack_target(target_index.unwrap(), classes)?;
                    jsma(net, &x, &t, config)?
                }
                AttackSpec::CwL2 { config } => {
                    let t = OneHotLabel::attack_target(target_index.unwrap(), classes)?;
                    let per_sample = CwConfig {
                        seed: config.seed.wrapping_add(sample_id as u64),
                        ..*config
                    };
                    cw_l2(net, &x, &t, &per_sample)?
                }
            };
            Ok(Some(BatchItem {
                sample_id,
                true_label,
                result,
            }))
        })
        .collect::<Result<Vec<Option<BatchItem>>>>()?;

    Ok(items.into_iter().flatten().collect())
}

/// Fraction of successful attacks; `None` for an empty batch.
pub fn success_rate(items: &[BatchItem]) -> Option<f64> {
    if items.is_empty() {
        return None;
    }
    let hits = items.iter().filter(|i| i.result.success).count();
    Some(hits as f64 / items.len() as f64)
}

/// Per-sample rows plus a trailing summary line.
pub fn to_csv(items: &[BatchItem], attack_name: &str, targeted: bool) -> String {
    let mut out = String::from(
        "sample_id,attack,targeted,true,target,predicted,success,norm,iterations,masked_gradient_flag\n",
    );
    for item in items {
        let target = item
            .result
            .target_label
            .map(|t| t.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6},{},{}\n",
            item.sample_id,
            attack_name,
            targeted,
            item.true_label,
            target,
            item.result.predicted_label,
            item.result.success,
            item.result.achieved_norm,
            item.result.iterations_used,
            item.result.masked_gradient,
        ));
    }
    match success_rate(items) {
        Some(rate) => out.push_str(&format!(
            "# summary success_rate={:.4} n={}\n",
            rate,
            items.len()
        )),
        None => out.push_str("# summary success_rate=NA n=0\n"),
    }
    out
}
