//! Shared pipeline pieces: dataset loading with class reduction, model
//! loading, attack-spec construction, and sample selection.

use std::path::Path;

use gradlab_attacks::{AttackSpec, CwConfig, JsmaConfig, PerturbationBudget, TargetPolicy};
use gradlab_data::{binary_reduce, load_idx, ClassSelection, LabeledDataset, Split};
use gradlab_nn::Network;
use gradlab_tensor::Precision;

use crate::config::{Config, DataPaths};
use crate::error::{runtime, validation, Result};

/// `a,b` keeps those two classes; `random` draws a seeded pair; `none` keeps
/// the dataset as loaded.
pub fn class_selection(config: &Config, flag: Option<String>, seed: u64) -> Result<Option<ClassSelection>> {
    let raw = config.resolve("classes", flag, "none".to_string())?;
    match raw.as_str() {
        "none" => Ok(None),
        "random" => Ok(Some(ClassSelection::Random { seed })),
        pair => {
            let parts: Vec<&str> = pair.split(',').collect();
            let bad = || validation(format!("--classes expects a,b or random, got {pair:?}"));
            if parts.len() != 2 {
                return Err(bad());
            }
            let class_a: u8 = parts[0].trim().parse().map_err(|_| bad())?;
            let class_b: u8 = parts[1].trim().parse().map_err(|_| bad())?;
            Ok(Some(ClassSelection::Pair { class_a, class_b }))
        }
    }
}

pub fn load_datasets(
    paths: &DataPaths,
    selection: Option<ClassSelection>,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let train = load_idx(&paths.train_images, &paths.train_labels, Split::Train)
        .map_err(|e| validation(e.to_string()))?;
    let test = load_idx(&paths.test_images, &paths.test_labels, Split::Test)
        .map_err(|e| validation(e.to_string()))?;
    match selection {
        None => Ok((train, test)),
        Some(selection) => {
            let train = binary_reduce(&train, selection).map_err(runtime)?;
            // Reuse the exact pair the training split settled on, so a random
            // selection cannot diverge between splits.
            let map = train.class_map().expect("reduced datasets carry a map");
            let pair = ClassSelection::Pair {
                class_a: map[0].0,
                class_b: map[1].0,
            };
            let test = binary_reduce(&test, pair).map_err(runtime)?;
            Ok((train, test))
        }
    }
}

pub fn load_model(path: &Path) -> Result<Network> {
    gradlab_nn::serialize::load(path).map_err(|e| validation(e.to_string()))
}

pub fn parse_precision(raw: &str) -> Result<Precision> {
    match raw {
        "single" => Ok(Precision::Single),
        "double" => Ok(Precision::Double),
        other => Err(validation(format!(
            "--precision expects single or double, got {other:?}"
        ))),
    }
}

pub const ATTACK_NAMES: [&str; 6] = ["fgsm", "bim", "tgsm", "targeted-bim", "jsma", "cw-l2"];

/// Builds one attack spec from the resolved config.
pub fn attack_spec(
    config: &Config,
    name: &str,
    epsilon: f64,
    steps: usize,
    seed: u64,
) -> Result<AttackSpec> {
    let budget_single =
        || PerturbationBudget::single_step(epsilon).map_err(|e| validation(e.to_string()));
    let budget_multi =
        || PerturbationBudget::iterative(epsilon, steps).map_err(|e| validation(e.to_string()));
    match name {
        "fgsm" => Ok(AttackSpec::Fgsm { budget: budget_single()? }),
        "bim" => Ok(AttackSpec::Bim { budget: budget_multi()? }),
        "tgsm" => Ok(AttackSpec::Tgsm { budget: budget_single()? }),
        "targeted-bim" => Ok(AttackSpec::TargetedBim { budget: budget_multi()? }),
        "jsma" => Ok(AttackSpec::Jsma {
            config: JsmaConfig {
                max_features: config.resolve("attack.jsma.max_features", None, 112usize)?,
                theta: config.resolve("attack.jsma.theta", None, 1.0f64)?,
            },
        }),
        "cw-l2" => Ok(AttackSpec::CwL2 {
            config: CwConfig {
                confidence: config.resolve("attack.cw.kappa", None, 0.0f64)?,
                c_min: config.resolve("attack.cw.c_min", None, 1e-3f64)?,
                c_max: config.resolve("attack.cw.c_max", None, 1e3f64)?,
                c_steps: config.resolve("attack.cw.c_steps", None, 8usize)?,
                iters: config.resolve("attack.cw.iters", None, 200usize)?,
                learning_rate: config.resolve("attack.cw.lr", None, 0.1f64)?,
                seed,
            },
        }),
        other => Err(validation(format!(
            "unknown attack {other:?}; valid names: {}",
            ATTACK_NAMES.join(", ")
        ))),
    }
}

pub fn parse_target_policy(raw: Option<&str>) -> Result<Option<TargetPolicy>> {
    match raw {
        None => Ok(None),
        Some("other") => Ok(Some(TargetPolicy::OtherBinary)),
        Some(s) if s.starts_with("fixed:") => {
            let class: usize = s["fixed:".len()..].parse().map_err(|_| {
                validation(format!("--target-policy fixed:K needs an integer, got {s:?}"))
            })?;
            Ok(Some(TargetPolicy::Fixed(class)))
        }
        Some(other) => Err(validation(format!(
            "--target-policy expects other or fixed:K, got {other:?}"
        ))),
    }
}

/// First `limit` test samples, optionally restricted to one label.
pub fn select_samples(
    data: &LabeledDataset,
    limit: usize,
    class_filter: Option<usize>,
) -> Vec<usize> {
    (0..data.len())
        .filter(|&i| class_filter.is_none_or(|c| data.label(i) == c))
        .take(limit)
        .collect()
}
