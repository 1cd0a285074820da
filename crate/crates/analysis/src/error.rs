use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Nn(#[from] gradlab_nn::NnError),

    #[error(transparent)]
    Tensor(#[from] gradlab_tensor::TensorError),

    #[error(transparent)]
    Attack(#[from] gradlab_attacks::AttackError),

    #[error("logit-plane analysis needs a two-class network, got {0} classes")]
    BinaryOnly(usize),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("records are not paired with perturbed counterparts")]
    UnpairedRecords,

    #[error("sample {sample}: probe target equals the true label {label}")]
    TargetEqualsTrue { sample: usize, label: usize },

    #[error("gradient probes run in single precision, the network is {0}")]
    ProbeNeedsSinglePrecision(&'static str),

    #[error("saturation reports need inference temperature 1, found {0}")]
    NotAtUnitTemperature(f64),

    #[error("{left} targets for {right} samples")]
    TargetCount { left: usize, right: usize },
}
