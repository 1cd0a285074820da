use gradlab_attacks::{run_batch, success_rate, to_csv};

use crate::common::{
    attack_spec, class_selection, load_datasets, load_model, parse_target_policy, select_samples,
};
use crate::config::{Config, DataPaths};
use crate::error::{runtime, validation, Result};
use crate::io::write_atomic;
use crate::{out_dir, AttackArgs};

pub fn run(args: AttackArgs) -> Result<()> {
    let config = Config::load(args.common.config.as_deref())?;
    let out = out_dir(&args.common, &config)?;

    let model_path = config.resolve_opt(
        "model",
        args.model.as_ref().map(|p| p.display().to_string()),
    )?;
    let model_path = model_path.ok_or_else(|| validation("no model; pass --model"))?;
    let net = load_model(std::path::Path::new(&model_path))?;

    let seed = config.resolve("seed", args.common.seed, 42u64)?;
    let paths = DataPaths::resolve(&config, args.common.data_dir.as_deref())?;
    let selection = class_selection(&config, args.common.classes.clone(), seed)?;
    let (_, test) = load_datasets(&paths, selection)?;

    let names_raw = config.resolve("attack.name", args.attack.clone(), "fgsm".to_string())?;
    let epsilon = config.resolve("attack.epsilon", args.epsilon, 0.25f64)?;
    let steps = config.resolve("attack.steps", args.steps, 10usize)?;
    let sample_limit = config.resolve("attack.samples", args.samples, 200usize)?;
    let sample_class = config.resolve_opt("attack.sample_class", args.sample_class)?;
    let policy_raw = config.resolve_opt("attack.target_policy", args.target_policy.clone())?;
    let policy = parse_target_policy(policy_raw.as_deref())?;

    let sample_ids = select_samples(&test, sample_limit, sample_class);
    for name in names_raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let spec = attack_spec(&config, name, epsilon, steps, seed)?;
        if spec.is_targeted() && policy.is_none() {
            return Err(validation(format!(
                "{name} is targeted; pass --target-policy other or fixed:K"
            )));
        }
        let items = run_batch(&net, &test, &sample_ids, &spec, policy).map_err(runtime)?;
        let csv = to_csv(&items, spec.name(), spec.is_targeted());
        write_atomic(&out.join(format!("{}.csv", spec.name())), &csv)?;
        match success_rate(&items) {
            Some(rate) => println!("{name}: success rate {rate:.4} over {} samples", items.len()),
            None => println!("{name}: no samples attacked"),
        }
    }
    write_atomic(&out.join("manifest.txt"), &config.manifest("attack"))?;
    Ok(())
}
