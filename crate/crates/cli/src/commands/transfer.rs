use gradlab_attacks::PerturbationBudget;
use gradlab_analysis::transfer_experiment;

use crate::common::{class_selection, load_datasets, load_model, select_samples};
use crate::config::{Config, DataPaths};
use crate::error::{runtime, validation, Result};
use crate::io::write_atomic;
use crate::{out_dir, TransferArgs};

pub fn run(args: TransferArgs) -> Result<()> {
    let config = Config::load(args.common.config.as_deref())?;
    let out = out_dir(&args.common, &config)?;

    let surrogate_path = config
        .resolve_opt(
            "transfer.surrogate",
            args.surrogate.as_ref().map(|p| p.display().to_string()),
        )?
        .ok_or_else(|| validation("no surrogate model; pass --surrogate"))?;
    let victim_path = config
        .resolve_opt(
            "transfer.victim",
            args.victim.as_ref().map(|p| p.display().to_string()),
        )?
        .ok_or_else(|| validation("no victim model; pass --victim"))?;
    let surrogate = load_model(std::path::Path::new(&surrogate_path))?;
    let victim = load_model(std::path::Path::new(&victim_path))?;

    let seed = config.resolve("seed", args.common.seed, 42u64)?;
    let paths = DataPaths::resolve(&config, args.common.data_dir.as_deref())?;
    let selection = class_selection(&config, args.common.classes.clone(), seed)?;
    let (_, test) = load_datasets(&paths, selection)?;

    let epsilon = config.resolve("attack.epsilon", args.epsilon, 0.25f64)?;
    let sample_limit = config.resolve("analyze.samples", args.samples, 200usize)?;
    let sample_ids = select_samples(&test, sample_limit, None);

    let budget = PerturbationBudget::single_step(epsilon).map_err(|e| validation(e.to_string()))?;
    let outcome =
        transfer_experiment(&surrogate, &victim, &test, &sample_ids, &budget).map_err(runtime)?;

    let mut csv = String::from("metric,value\n");
    csv.push_str(&format!("transfer_rate,{:.6}\n", outcome.transfer_rate));
    csv.push_str(&format!(
        "surrogate_success_rate,{:.6}\n",
        outcome.surrogate_success_rate
    ));
    csv.push_str(&format!("samples,{}\n", outcome.samples));
    write_atomic(&out.join("transfer.csv"), &csv)?;
    write_atomic(&out.join("manifest.txt"), &config.manifest("transfer"))?;
    println!(
        "transfer rate {:.4} (direct {:.4}, {} samples)",
        outcome.transfer_rate, outcome.surrogate_success_rate, outcome.samples
    );
    Ok(())
}
