use gradlab_train::{distill_dual, distill_single, DistillMode, DistillationConfig};

use crate::commands::train::resolve_training_inputs;
use crate::config::Config;
use crate::error::{runtime, validation, Result};
use crate::io::write_atomic;
use crate::{out_dir, DistillArgs};

pub fn run(args: DistillArgs) -> Result<()> {
    let config = Config::load(args.train.common.config.as_deref())?;
    let out = out_dir(&args.train.common, &config)?;

    let mode_raw = config.resolve("distill.mode", args.mode.clone(), "dual".to_string())?;
    let mode = DistillMode::from_name(&mode_raw)
        .ok_or_else(|| validation(format!("--mode expects dual or single, got {mode_raw:?}")))?;

    // The temperature default for distillation is 30; --temperature overrides.
    let (train_config, arch, train, test) = resolve_training_inputs(&config, &args.train, 30.0)?;
    let distill_config = DistillationConfig {
        temperature: train_config.temperature,
        mode,
        epochs: train_config.epochs,
        batch_size: train_config.batch_size,
        learning_rate: train_config.learning_rate,
        seed: train_config.seed,
        precision: train_config.precision,
    };
    config.record("distill.temperature", &distill_config.temperature);

    match mode {
        DistillMode::Dual => {
            let outcome = distill_dual(arch, &train, &test, &distill_config).map_err(runtime)?;
            gradlab_nn::serialize::save(&outcome.teacher, &out.join("teacher.bin"))
                .map_err(runtime)?;
            gradlab_nn::serialize::save(&outcome.student, &out.join("student.bin"))
                .map_err(runtime)?;
            write_atomic(&out.join("teacher_report.csv"), &outcome.teacher_report.to_csv())?;
            write_atomic(&out.join("student_report.csv"), &outcome.student_report.to_csv())?;
            write_atomic(&out.join("manifest.txt"), &config.manifest("distill"))?;
            println!(
                "dual distillation -> {} (student test accuracy {:.4})",
                out.display(),
                outcome.student_report.test_accuracy
            );
        }
        DistillMode::Single => {
            let (net, report) =
                distill_single(arch, &train, &test, &distill_config).map_err(runtime)?;
            gradlab_nn::serialize::save(&net, &out.join("student.bin")).map_err(runtime)?;
            write_atomic(&out.join("student_report.csv"), &report.to_csv())?;
            write_atomic(&out.join("manifest.txt"), &config.manifest("distill"))?;
            println!(
                "single-phase distillation -> {} (test accuracy {:.4})",
                out.display(),
                report.test_accuracy
            );
        }
    }
    Ok(())
}
