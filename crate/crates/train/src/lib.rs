//! Stochastic gradient descent training and knowledge-distillation pipelines.
//!
//! Both distillation flavours train at an elevated softmax temperature and set
//! the resulting network's inference temperature back to one. The dual-phase
//! pipeline trains a teacher on hard labels, then a student on the teacher's
//! soft probability outputs; the single-phase pipeline trains one network on
//! hard labels at temperature and stops there.

pub mod config;
pub mod distill;
pub mod error;
pub mod report;
pub mod sgd;

pub use config::{parse_key_value, DistillMode, DistillationConfig, TrainConfig};
pub use distill::{distill_dual, distill_single, soft_labels, DistillOutcome};
pub use error::TrainError;
pub use report::TrainReport;
pub use sgd::{accuracy, sgd_train, sgd_train_soft};

pub type Result<T> = std::result::Result<T, TrainError>;
