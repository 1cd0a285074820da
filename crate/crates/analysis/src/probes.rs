//! Single-precision input-gradient probes.
//!
//! "Underflow" has one crisp meaning here: every component of the
//! single-precision input gradient is exactly 0.0. Subnormal-but-nonzero
//! values do not count. Probes always run against the inference-mode network
//! (dropout disabled, the network's inference temperature).

use gradlab_data::LabeledDataset;
use gradlab_nn::{Network, OneHotLabel};
use gradlab_tensor::Precision;
use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct SampleProbe {
    pub sample_id: usize,
    /// Infinity norm of the single-precision input gradient.
    pub grad_inf_norm: f64,
    /// Every input-gradient component is exactly zero.
    pub underflow: bool,
    /// Loss gradient at the true-class logit.
    pub loss_logit_gradient_true: f64,
    /// Loss gradient at the target-class logit (targeted probes only).
    pub loss_logit_gradient_target: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GradientProbeReport {
    pub samples: Vec<SampleProbe>,
    pub underflow_fraction: f64,
    /// Mean of |d L_target / d z_target| (targeted probes only).
    pub mean_abs_target_gradient: Option<f64>,
}

/// Side-by-side non-targeted probe of two networks over the samples both
/// classify correctly; the recorded subset is returned with the reports.
#[derive(Clone, Debug)]
pub struct MaskingProbe {
    pub subset: Vec<usize>,
    pub plain: GradientProbeReport,
    pub distilled: GradientProbeReport,
}

/// Non-targeted probe: gradient of the true-class loss at each sample.
pub fn nontargeted_gradient_probe(
    net: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
) -> Result<GradientProbeReport> {
    require_single(net)?;
    let samples = sample_ids
        .par_iter()
        .map(|&sample_id| {
            let label = data.label(sample_id);
            probe_one(net, data, sample_id, label, None)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(samples))
}

pub fn nontargeted_masking_probe(
    plain: &Network,
    distilled: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
) -> Result<MaskingProbe> {
    require_single(plain)?;
    require_single(distilled)?;
    let subset: Vec<usize> = sample_ids
        .par_iter()
        .map(|&id| -> Result<Option<usize>> {
            let x = data.image(id, Precision::Single);
            let label = data.label(id);
            let both = plain.predict(&x)? == label && distilled.predict(&x)? == label;
            Ok(both.then_some(id))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if subset.is_empty() {
        return Err(AnalysisError::EmptySampleSet);
    }
    Ok(MaskingProbe {
        plain: nontargeted_gradient_probe(plain, data, &subset)?,
        distilled: nontargeted_gradient_probe(distilled, data, &subset)?,
        subset,
    })
}

/// Targeted probe: gradient of the target-class loss. Every target must
/// differ from the sample's true label.
pub fn targeted_gradient_probe(
    net: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
    targets: &[usize],
) -> Result<GradientProbeReport> {
    require_single(net)?;
    if targets.len() != sample_ids.len() {
        return Err(AnalysisError::TargetCount {
            left: targets.len(),
            right: sample_ids.len(),
        });
    }
    for (&sample, &target) in sample_ids.iter().zip(targets) {
        if data.label(sample) == target {
            return Err(AnalysisError::TargetEqualsTrue {
                sample,
                label: target,
            });
        }
    }
    let samples = sample_ids
        .par_iter()
        .zip(targets)
        .map(|(&sample_id, &target)| {
            let label = data.label(sample_id);
            probe_one(net, data, sample_id, label, Some(target))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(samples))
}

fn probe_one(
    net: &Network,
    data: &LabeledDataset,
    sample_id: usize,
    true_label: usize,
    target: Option<usize>,
) -> Result<SampleProbe> {
    let x = data.image(sample_id, Precision::Single);
    let classes = net.class_count();
    let loss_label = match target {
        Some(t) => OneHotLabel::attack_target(t, classes)?,
        None => OneHotLabel::ground_truth(true_label, classes)?,
    };
    let back = net.loss_backward(&x, &loss_label.to_tensor(Precision::Single))?;
    let logit_grad = back.logit_gradient.to_f64_vec();
    Ok(SampleProbe {
        sample_id,
        grad_inf_norm: back.input_gradient.infinity_norm(),
        underflow: back.input_gradient.is_all_zero(),
        loss_logit_gradient_true: logit_grad[true_label],
        loss_logit_gradient_target: target.map(|t| logit_grad[t]),
    })
}

fn aggregate(samples: Vec<SampleProbe>) -> GradientProbeReport {
    let n = samples.len() as f64;
    let underflow_fraction = if samples.is_empty() {
        0.0
    } else {
        samples.iter().filter(|s| s.underflow).count() as f64 / n
    };
    let targeted: Vec<f64> = samples
        .iter()
        .filter_map(|s| s.loss_logit_gradient_target)
        .collect();
    let mean_abs_target_gradient = if targeted.is_empty() {
        None
    } else {
        Some(targeted.iter().map(|g| g.abs()).sum::<f64>() / targeted.len() as f64)
    };
    GradientProbeReport {
        samples,
        underflow_fraction,
        mean_abs_target_gradient,
    }
}

/// Per-sample rows plus aggregate comment lines.
pub fn probe_csv(report: &GradientProbeReport) -> String {
    let mut out =
        String::from("sample_id,grad_inf_norm,underflow,dldz_true,dldz_target\n");
    for s in &report.samples {
        out.push_str(&format!(
            "{},{:e},{},{:.6},{}\n",
            s.sample_id,
            s.grad_inf_norm,
            s.underflow,
            s.loss_logit_gradient_true,
            s.loss_logit_gradient_target
                .map(|g| format!("{g:.6}"))
                .unwrap_or_default(),
        ));
    }
    out.push_str(&format!(
        "# underflow_fraction={:.4} n={}\n",
        report.underflow_fraction,
        report.samples.len()
    ));
    if let Some(mean) = report.mean_abs_target_gradient {
        out.push_str(&format!("# mean_abs_target_gradient={mean:.6}\n"));
    }
    out
}

fn require_single(net: &Network) -> Result<()> {
    if net.precision() != Precision::Single {
        return Err(AnalysisError::ProbeNeedsSinglePrecision(
            net.precision().name(),
        ));
    }
    Ok(())
}
