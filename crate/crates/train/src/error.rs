use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Nn(#[from] gradlab_nn::NnError),

    #[error(transparent)]
    Tensor(#[from] gradlab_tensor::TensorError),

    #[error("training diverged (loss is not finite) at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("dataset images are {data:?} but the network expects {net:?}")]
    InputShape { data: [usize; 3], net: [usize; 3] },

    #[error("expected mode {expected} but the config says {actual}")]
    WrongMode {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("soft targets hold {rows} rows for {samples} samples")]
    SoftTargetCount { rows: usize, samples: usize },

    #[error("config: {0}")]
    Config(String),
}
