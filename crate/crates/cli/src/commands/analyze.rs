use gradlab_analysis::svg::{logit_figure, saturation_figure};
use gradlab_analysis::{
    distillation_anchor_stats, logit_plane_scan, logit_records_csv, nontargeted_masking_probe,
    perturbation_shift, probe_csv, saturation_csv, softmax_saturation_report,
    targeted_gradient_probe,
};
use gradlab_nn::Network;

use crate::common::{
    attack_spec, class_selection, load_datasets, load_model, parse_target_policy, select_samples,
};
use crate::config::{Config, DataPaths};
use crate::error::{runtime, validation, Result};
use crate::io::write_atomic;
use crate::{out_dir, AnalyzeArgs};

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let config = Config::load(args.common.config.as_deref())?;
    let out = out_dir(&args.common, &config)?;

    let plain_path = config.resolve_opt(
        "analyze.plain",
        args.plain.as_ref().map(|p| p.display().to_string()),
    )?;
    let plain_path = plain_path.ok_or_else(|| validation("no model; pass --plain"))?;
    let plain = load_model(std::path::Path::new(&plain_path))?;
    let distilled_path = config.resolve_opt(
        "analyze.distilled",
        args.distilled.as_ref().map(|p| p.display().to_string()),
    )?;
    let distilled: Option<Network> = match &distilled_path {
        Some(path) => Some(load_model(std::path::Path::new(path))?),
        None => None,
    };

    let seed = config.resolve("seed", args.common.seed, 42u64)?;
    let paths = DataPaths::resolve(&config, args.common.data_dir.as_deref())?;
    let selection = class_selection(&config, args.common.classes.clone(), seed)?;
    let (_, test) = load_datasets(&paths, selection)?;

    let sample_limit = config.resolve("analyze.samples", args.samples, 200usize)?;
    let sample_class = config.resolve_opt("analyze.sample_class", args.sample_class)?;
    let sample_ids = select_samples(&test, sample_limit, sample_class);

    let attack_name = config.resolve_opt("attack.name", args.attack.clone())?;
    let attack = match &attack_name {
        None => None,
        Some(name) => {
            let epsilon = config.resolve("attack.epsilon", args.epsilon, 0.25f64)?;
            let steps = config.resolve("attack.steps", args.steps, 10usize)?;
            Some(attack_spec(&config, name, epsilon, steps, seed)?)
        }
    };
    let policy_raw = config.resolve_opt("attack.target_policy", args.target_policy.clone())?;
    let policy = parse_target_policy(policy_raw.as_deref())?;
    if let Some(spec) = &attack {
        if spec.is_targeted() && policy.is_none() {
            return Err(validation(format!(
                "{} is targeted; pass --target-policy other or fixed:K",
                spec.name()
            )));
        }
    }

    // Logit-plane scans: one figure per model.
    for (role, net) in [("plain", Some(&plain)), ("distilled", distilled.as_ref())] {
        let Some(net) = net else { continue };
        let pairs = logit_plane_scan(
            net,
            &test,
            &sample_ids,
            attack.as_ref().map(|spec| (spec, policy)),
        )
        .map_err(runtime)?;
        write_atomic(&out.join(format!("logits_{role}.csv")), &logit_records_csv(&pairs))?;
        let shifts = if pairs.iter().all(|p| p.perturbed.is_some()) && !pairs.is_empty() {
            perturbation_shift(&pairs).map_err(runtime)?
        } else {
            Vec::new()
        };
        let figure = logit_figure(
            &pairs,
            &shifts,
            attack.as_ref().map(|a| a.name()).unwrap_or("clean"),
        );
        write_atomic(&out.join(format!("logits_{role}.svg")), &figure)?;
        let stats = distillation_anchor_stats(net, &test, &sample_ids).map_err(runtime)?;
        config.record(
            &format!("result.{role}.mean_max_abs_logit"),
            &format!("{:.6}", stats.mean_max_abs_logit),
        );
    }

    // Probes and saturation need the pair.
    if let Some(distilled) = &distilled {
        let probe =
            nontargeted_masking_probe(&plain, distilled, &test, &sample_ids).map_err(runtime)?;
        write_atomic(&out.join("probe_nontargeted_plain.csv"), &probe_csv(&probe.plain))?;
        write_atomic(
            &out.join("probe_nontargeted_distilled.csv"),
            &probe_csv(&probe.distilled),
        )?;
        println!(
            "non-targeted underflow fraction: plain {:.4}, distilled {:.4} ({} samples)",
            probe.plain.underflow_fraction,
            probe.distilled.underflow_fraction,
            probe.subset.len()
        );

        let targets: Vec<usize> = probe.subset.iter().map(|&id| 1 - test.label(id)).collect();
        let targeted =
            targeted_gradient_probe(distilled, &test, &probe.subset, &targets).map_err(runtime)?;
        write_atomic(&out.join("probe_targeted_distilled.csv"), &probe_csv(&targeted))?;
        if let Some(mean) = targeted.mean_abs_target_gradient {
            println!("targeted |dL/dz_target| mean on distilled: {mean:.4}");
        }

        let rows =
            softmax_saturation_report(&plain, distilled, &test, &sample_ids).map_err(runtime)?;
        write_atomic(&out.join("saturation.csv"), &saturation_csv(&rows))?;
        write_atomic(&out.join("saturation.svg"), &saturation_figure(&rows))?;
    }

    write_atomic(&out.join("manifest.txt"), &config.manifest("analyze"))?;
    println!("analysis artifacts -> {}", out.display());
    Ok(())
}
