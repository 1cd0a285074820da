//! Dual-phase and single-phase defensive distillation.

use gradlab_data::LabeledDataset;
use gradlab_nn::{Arch, Network};
use rayon::prelude::*;

use crate::config::{DistillMode, DistillationConfig};
use crate::error::TrainError;
use crate::report::TrainReport;
use crate::sgd::{sgd_train, sgd_train_soft};
use crate::Result;

pub struct DistillOutcome {
    pub teacher: Network,
    pub student: Network,
    pub teacher_report: TrainReport,
    pub student_report: TrainReport,
}

/// The network's softmax outputs at `temperature` over every sample, row-major
/// `[samples, classes]`. These are the student phase's training targets.
pub fn soft_labels(net: &Network, data: &LabeledDataset, temperature: f64) -> Result<Vec<f64>> {
    let precision = net.precision();
    let rows = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let record = net.record_at_temperature(temperature)?;
            let p = record.evaluate(&data.image(i, precision))?;
            Ok(p.to_f64_vec())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(rows.concat())
}

/// Teacher on hard labels, student on the teacher's soft outputs, both at the
/// config temperature; the student (and teacher) infer at temperature one.
///
/// The student starts from fresh random weights (`seed + 1`), not the
/// teacher's.
pub fn distill_dual(
    arch: Arch,
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &DistillationConfig,
) -> Result<DistillOutcome> {
    if config.mode != DistillMode::Dual {
        return Err(TrainError::WrongMode {
            expected: "dual",
            actual: config.mode.name(),
        });
    }
    let train_config = config.train_config();
    let classes = train.class_count();
    let shape = train.image_shape();

    let teacher = arch.build(classes, shape, config.precision, config.seed)?;
    let (mut teacher, teacher_report) = sgd_train(teacher, train, test, &train_config)?;

    let soft = soft_labels(&teacher, train, config.temperature)?;

    let student = arch.build(
        classes,
        shape,
        config.precision,
        config.seed.wrapping_add(1),
    )?;
    let (mut student, student_report) = sgd_train_soft(student, train, &soft, test, &train_config)?;

    for net in [&mut teacher, &mut student] {
        net.set_training_temperature(config.temperature);
        net.set_inference_temperature(1.0);
    }
    Ok(DistillOutcome {
        teacher,
        student,
        teacher_report,
        student_report,
    })
}

/// One network trained on hard labels at the config temperature, then used at
/// inference temperature one. At temperature 1 this is exactly plain training.
pub fn distill_single(
    arch: Arch,
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &DistillationConfig,
) -> Result<(Network, TrainReport)> {
    if config.mode != DistillMode::Single {
        return Err(TrainError::WrongMode {
            expected: "single",
            actual: config.mode.name(),
        });
    }
    let net = arch.build(
        train.class_count(),
        train.image_shape(),
        config.precision,
        config.seed,
    )?;
    let (mut net, report) = sgd_train(net, train, test, &config.train_config())?;
    net.set_training_temperature(config.temperature);
    net.set_inference_temperature(1.0);
    Ok((net, report))
}
