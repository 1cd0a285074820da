use gradlab_nn::Arch;
use gradlab_train::{sgd_train, TrainConfig};

use crate::common::{class_selection, load_datasets, parse_precision};
use crate::config::{Config, DataPaths};
use crate::error::{runtime, validation, Result};
use crate::io::write_atomic;
use crate::{out_dir, TrainArgs};

pub fn run(args: TrainArgs) -> Result<()> {
    let config = Config::load(args.common.config.as_deref())?;
    let out = out_dir(&args.common, &config)?;
    let (net, report, _, _) = train_pipeline(&config, &args, 1.0)?;

    let model_path = out.join("model.bin");
    gradlab_nn::serialize::save(&net, &model_path).map_err(runtime)?;
    write_atomic(&out.join("report.csv"), &report.to_csv())?;
    write_atomic(&out.join("manifest.txt"), &config.manifest("train"))?;
    println!(
        "trained model -> {} (test accuracy {:.4})",
        model_path.display(),
        report.test_accuracy
    );
    Ok(())
}

/// Shared by `train` and `distill`: resolves data and hyperparameters, then
/// trains one network at `temperature`.
pub fn train_pipeline(
    config: &Config,
    args: &TrainArgs,
    default_temperature: f64,
) -> Result<(
    gradlab_nn::Network,
    gradlab_train::TrainReport,
    gradlab_data::LabeledDataset,
    gradlab_data::LabeledDataset,
)> {
    let (train_config, arch, train, test) = resolve_training_inputs(config, args, default_temperature)?;
    let net = arch
        .build(
            train.class_count(),
            train.image_shape(),
            train_config.precision,
            train_config.seed,
        )
        .map_err(runtime)?;
    let (net, report) = sgd_train(net, &train, &test, &train_config).map_err(runtime)?;
    Ok((net, report, train, test))
}

pub fn resolve_training_inputs(
    config: &Config,
    args: &TrainArgs,
    default_temperature: f64,
) -> Result<(
    TrainConfig,
    Arch,
    gradlab_data::LabeledDataset,
    gradlab_data::LabeledDataset,
)> {
    let defaults = TrainConfig::default();
    let seed = config.resolve("seed", args.common.seed, defaults.seed)?;
    let precision = parse_precision(&config.resolve(
        "precision",
        args.common.precision.clone(),
        "single".to_string(),
    )?)?;
    let train_config = TrainConfig {
        epochs: config.resolve("train.epochs", args.epochs, defaults.epochs)?,
        batch_size: config.resolve("train.batch_size", args.batch_size, defaults.batch_size)?,
        learning_rate: config.resolve(
            "train.learning_rate",
            args.learning_rate,
            defaults.learning_rate,
        )?,
        temperature: config.resolve("train.temperature", args.temperature, default_temperature)?,
        seed,
        precision,
    };

    let arch_id = config.resolve("arch", args.arch.clone(), "reference".to_string())?;
    let arch = Arch::from_id(&arch_id)
        .ok_or_else(|| validation(format!("unknown arch {arch_id:?}; use reference or compact")))?;

    let paths = DataPaths::resolve(config, args.common.data_dir.as_deref())?;
    let selection = class_selection(config, args.common.classes.clone(), seed)?;
    let (train, test) = load_datasets(&paths, selection)?;
    if let Some(map) = train.class_map() {
        config.record(
            "classes.resolved",
            &format!("{},{}", map[0].0, map[1].0),
        );
    }
    Ok((train_config, arch, train, test))
}
