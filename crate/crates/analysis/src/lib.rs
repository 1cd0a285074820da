//! The experiment layer: logit-plane scans over two-class networks,
//! single-precision gradient-masking probes, softmax saturation reports, and
//! the surrogate transfer experiment, with CSV and SVG emission.

pub mod error;
pub mod logits;
pub mod probes;
pub mod saturation;
pub mod svg;
pub mod transfer;

pub use error::AnalysisError;
pub use logits::{
    distillation_anchor_stats, logit_plane_scan, logit_records_csv, perturbation_shift,
    AnchorStats, LogitPair, LogitRecord, Phase,
};
pub use probes::{
    nontargeted_gradient_probe, nontargeted_masking_probe, probe_csv, targeted_gradient_probe,
    GradientProbeReport, MaskingProbe, SampleProbe,
};
pub use saturation::{saturation_csv, softmax_saturation_report, SaturationRow};
pub use transfer::{transfer_experiment, TransferOutcome};

pub type Result<T> = std::result::Result<T, AnalysisError>;
