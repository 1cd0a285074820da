//! Max-softmax comparison between a plain and a distilled network.

use gradlab_data::LabeledDataset;
use gradlab_nn::{argmax, Network};
use rayon::prelude::*;

use crate::error::AnalysisError;
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct SaturationRow {
    pub sample_id: usize,
    pub plain_max: f64,
    pub plain_predicted: usize,
    pub distilled_max: f64,
    pub distilled_predicted: usize,
}

/// Per-sample maximum softmax output of both networks, at inference
/// temperature one (anything else is rejected).
pub fn softmax_saturation_report(
    plain: &Network,
    distilled: &Network,
    data: &LabeledDataset,
    sample_ids: &[usize],
) -> Result<Vec<SaturationRow>> {
    for net in [plain, distilled] {
        if net.inference_temperature() != 1.0 {
            return Err(AnalysisError::NotAtUnitTemperature(
                net.inference_temperature(),
            ));
        }
    }
    if sample_ids.is_empty() {
        return Err(AnalysisError::EmptySampleSet);
    }
    sample_ids
        .par_iter()
        .map(|&sample_id| -> Result<SaturationRow> {
            let max_of = |net: &Network| -> Result<(f64, usize)> {
                let p = net
                    .probabilities(&data.image(sample_id, net.precision()))?
                    .to_f64_vec();
                let predicted = argmax(&p);
                Ok((p[predicted], predicted))
            };
            let (plain_max, plain_predicted) = max_of(plain)?;
            let (distilled_max, distilled_predicted) = max_of(distilled)?;
            Ok(SaturationRow {
                sample_id,
                plain_max,
                plain_predicted,
                distilled_max,
                distilled_predicted,
            })
        })
        .collect()
}

pub fn saturation_csv(rows: &[SaturationRow]) -> String {
    let mut out = String::from("sample_id,plain_max,distilled_max\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6}\n",
            r.sample_id, r.plain_max, r.distilled_max
        ));
    }
    let n = rows.len() as f64;
    out.push_str(&format!(
        "# mean_plain_max={:.6} mean_distilled_max={:.6}\n",
        rows.iter().map(|r| r.plain_max).sum::<f64>() / n,
        rows.iter().map(|r| r.distilled_max).sum::<f64>() / n,
    ));
    out
}
