use thiserror::Error;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Nn(#[from] gradlab_nn::NnError),

    #[error(transparent)]
    Tensor(#[from] gradlab_tensor::TensorError),

    #[error("input values must lie in [0, 1]")]
    InputOutOfRange,

    #[error("input shape {input:?} does not match the network's {net:?}")]
    InputShape { input: Vec<usize>, net: [usize; 3] },

    #[error("budget: {0}")]
    BadBudget(String),

    #[error("saliency attack needs an even feature budget, got {0}")]
    OddFeatureBudget(usize),

    #[error("input dimensionality {dim} too large for a full Jacobian scan (limit {limit})")]
    JacobianTooLarge { dim: usize, limit: usize },

    #[error("constant search range is invalid: c_min {c_min}, c_max {c_max}, steps {steps}")]
    BadConstantSearch { c_min: f64, c_max: f64, steps: usize },

    #[error("targeted attacks need a target policy")]
    MissingTargetPolicy,

    #[error("the binary target policy needs a two-class network, got {0} classes")]
    BinaryPolicyNeedsTwoClasses(usize),

    #[error("target class {target} out of range for {classes} classes")]
    TargetOutOfRange { target: usize, classes: usize },
}
