//! Two-class logit-plane scans: where samples land in (z0, z1) space before
//! and after an attack.

use gradlab_attacks::{run_batch, AttackSpec, TargetPolicy};
use gradlab_data::LabeledDataset;
use gradlab_nn::{argmax, Network};
use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Clean,
    Perturbed,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Clean => "clean",
            Phase::Perturbed => "perturbed",
        }
    }
}

/// One point of the scatter data: a sample's logit pair plus bookkeeping.
#[derive(Clone, Debug)]
pub struct LogitRecord {
    pub sample_id: usize,
    pub z: (f64, f64),
    pub true_label: usize,
    pub predicted_label: usize,
    pub phase: Phase,
    /// Absent for clean records.
    pub attack_name: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LogitPair {
    pub clean: LogitRecord,
    pub perturbed: Option<LogitRecord>,
}

/// Clean (and, when an attack is given, perturbed) logit records for each
/// sample. Two-class networks only; the whole visualization is a plane.
pub fn logit_plane_scan(
    net: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
    attack: Option<(&AttackSpec, Option<TargetPolicy>)>,
) -> Result<Vec<LogitPair>> {
    require_binary(net)?;
    let mut pairs: Vec<LogitPair> = sample_ids
        .par_iter()
        .map(|&sample_id| -> Result<LogitPair> {
            let record = logit_record(net, data, sample_id, Phase::Clean, None)?;
            Ok(LogitPair {
                clean: record,
                perturbed: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some((spec, policy)) = attack {
        let items = run_batch(net, data, sample_ids, spec, policy)?;
        let mut by_id: std::collections::HashMap<usize, _> =
            items.into_iter().map(|i| (i.sample_id, i)).collect();
        // Samples the target policy skipped drop out of the pairing.
        pairs.retain(|p| by_id.contains_key(&p.clean.sample_id));
        for pair in &mut pairs {
            let item = by_id.remove(&pair.clean.sample_id).expect("retained above");
            let z = net.logits(&item.result.adversarial)?.to_f64_vec();
            pair.perturbed = Some(LogitRecord {
                sample_id: pair.clean.sample_id,
                z: (z[0], z[1]),
                true_label: pair.clean.true_label,
                predicted_label: argmax(&z),
                phase: Phase::Perturbed,
                attack_name: Some(spec.name().to_string()),
            });
        }
    }
    Ok(pairs)
}

fn logit_record(
    net: &Network,
    data: &LabeledDataset,
    sample_id: usize,
    phase: Phase,
    attack_name: Option<String>,
) -> Result<LogitRecord> {
    let z = net
        .logits(&data.image(sample_id, net.precision()))?
        .to_f64_vec();
    Ok(LogitRecord {
        sample_id,
        z: (z[0], z[1]),
        true_label: data.label(sample_id),
        predicted_label: argmax(&z),
        phase,
        attack_name,
    })
}

/// Per-sample displacement `perturbed z - clean z`. Every pair must carry a
/// perturbed record.
pub fn perturbation_shift(pairs: &[LogitPair]) -> Result<Vec<(f64, f64)>> {
    pairs
        .iter()
        .map(|pair| {
            let perturbed = pair
                .perturbed
                .as_ref()
                .ok_or(AnalysisError::UnpairedRecords)?;
            Ok((
                perturbed.z.0 - pair.clean.z.0,
                perturbed.z.1 - pair.clean.z.1,
            ))
        })
        .collect()
}

/// Where the clean logits sit in the plane, in aggregate.
#[derive(Clone, Copy, Debug)]
pub struct AnchorStats {
    /// Mean of (|z0| + |z1|) / 2.
    pub mean_abs_logit: f64,
    /// Mean Euclidean distance from the origin.
    pub mean_distance_from_origin: f64,
    /// Mean |z0 + z1|; small values mean the cloud hugs the x = -y line.
    pub mean_abs_logit_sum: f64,
    /// Mean of max(|z0|, |z1|), the logit-amplification statistic.
    pub mean_max_abs_logit: f64,
}

pub fn distillation_anchor_stats(
    net: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
) -> Result<AnchorStats> {
    require_binary(net)?;
    if sample_ids.is_empty() {
        return Err(AnalysisError::EmptySampleSet);
    }
    let logits: Vec<(f64, f64)> = sample_ids
        .par_iter()
        .map(|&id| -> Result<(f64, f64)> {
            let z = net.logits(&data.image(id, net.precision()))?.to_f64_vec();
            Ok((z[0], z[1]))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = logits.len() as f64;
    Ok(AnchorStats {
        mean_abs_logit: logits.iter().map(|z| (z.0.abs() + z.1.abs()) / 2.0).sum::<f64>() / n,
        mean_distance_from_origin: logits.iter().map(|z| z.0.hypot(z.1)).sum::<f64>() / n,
        mean_abs_logit_sum: logits.iter().map(|z| (z.0 + z.1).abs()).sum::<f64>() / n,
        mean_max_abs_logit: logits.iter().map(|z| z.0.abs().max(z.1.abs())).sum::<f64>() / n,
    })
}

/// `sample_id,z0,z1,true,predicted,phase,attack` rows, clean record first and
/// perturbed record (when present) immediately after.
pub fn logit_records_csv(pairs: &[LogitPair]) -> String {
    let mut out = String::from("sample_id,z0,z1,true,predicted,phase,attack\n");
    let mut push = |r: &LogitRecord| {
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{},{},{}\n",
            r.sample_id,
            r.z.0,
            r.z.1,
            r.true_label,
            r.predicted_label,
            r.phase.name(),
            r.attack_name.as_deref().unwrap_or("")
        ));
    };
    for pair in pairs {
        push(&pair.clean);
        if let Some(p) = &pair.perturbed {
            push(p);
        }
    }
    out
}

fn require_binary(net: &Network) -> Result<()> {
    if net.class_count() != 2 {
        return Err(AnalysisError::BinaryOnly(net.class_count()));
    }
    Ok(())
}
