//! L2-minimal targeted attack in logit space.
//!
//! The attack never reads the softmax. It minimizes
//! `||delta||_2^2 + c * q(x + delta)` with
//! `q(x') = max(max_{i != target} z_i(x') - z_target(x'), -kappa)` by plain
//! gradient descent, with the box constraint `x + delta in [0, 1]^n` enforced
//! through a tanh change of variables. The tradeoff constant `c` is found by
//! a log-scale bisection for the smallest value that still succeeds, and the
//! returned candidate is the successful one of minimal L2 norm across the
//! whole search.

use gradlab_nn::{argmax, Network, OneHotLabel, OutputStage};
use gradlab_tensor::{Precision, Tensor};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::budget::{NormKind, PerturbationBudget};
use crate::error::AttackError;
use crate::gradient_sign::finish;
use crate::result::AttackResult;
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct CwConfig {
    /// Required logit margin `kappa`; 0 asks for a bare argmax flip.
    pub confidence: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Number of optimization runs spent on the constant search.
    pub c_steps: usize,
    /// Gradient-descent iterations per run.
    pub iters: usize,
    pub learning_rate: f64,
    /// Seeds the perturbation of the optimizer start point, the attack's one
    /// source of randomness.
    pub seed: u64,
}

impl Default for CwConfig {
    fn default() -> Self {
        Self {
            confidence: 0.0,
            c_min: 1e-3,
            c_max: 1e3,
            c_steps: 8,
            iters: 200,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

/// One optimization run's outcome in the constant search.
#[derive(Clone, Copy, Debug)]
pub struct CwTrial {
    pub c: f64,
    pub success: bool,
    /// L2 norm of the best successful perturbation of this run.
    pub best_l2: Option<f64>,
}

struct RunOutcome {
    best: Option<(f64, Vec<f64>)>,
    iterations: usize,
}

pub fn cw_l2(
    net: &Network,
    x: &Tensor,
    target: &OneHotLabel,
    config: &CwConfig,
) -> Result<AttackResult> {
    if x.shape() != net.input_shape() {
        return Err(AttackError::InputShape {
            input: x.shape().to_vec(),
            net: net.input_shape(),
        });
    }
    let clean = x.to_f64_vec();
    if clean.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(AttackError::InputOutOfRange);
    }
    if !(config.c_min.is_finite()
        && config.c_max.is_finite()
        && config.c_min >= 0.0
        && config.c_min <= config.c_max
        && config.c_steps >= 1)
    {
        return Err(AttackError::BadConstantSearch {
            c_min: config.c_min,
            c_max: config.c_max,
            steps: config.c_steps,
        });
    }
    let target_index = target.hot_index();
    if target_index >= net.class_count() {
        return Err(AttackError::TargetOutOfRange {
            target: target_index,
            classes: net.class_count(),
        });
    }

    // Optimizer start: the clean input mapped into tanh space, plus a small
    // seeded perturbation. The margin keeps atanh finite at the box faces.
    let margin = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w0: Vec<f64> = clean
        .iter()
        .map(|&v| {
            let clamped = v.clamp(margin, 1.0 - margin);
            (2.0 * clamped - 1.0).atanh() + 1e-3 * normal(&mut rng)
        })
        .collect();

    let mut trials: Vec<CwTrial> = Vec::new();
    let mut best_overall: Option<(f64, Vec<f64>)> = None;
    let mut total_iterations = 0usize;

    let mut record = |outcome: RunOutcome, c: f64| {
        total_iterations += outcome.iterations;
        trials.push(CwTrial {
            c,
            success: outcome.best.is_some(),
            best_l2: outcome.best.as_ref().map(|(l2, _)| *l2),
        });
        if let Some((l2, adv)) = outcome.best {
            let better = best_overall.as_ref().map_or(true, |(b, _)| l2 < *b);
            if better {
                best_overall = Some((l2, adv));
            }
        }
    };

    // Log-scale bisection for the smallest succeeding constant, starting at
    // the top of the range: success only gets easier as c grows, so a failure
    // at c_max is a failure everywhere.
    let mut lo = config.c_min;
    let mut hi = config.c_max;
    let first = optimize(net, &clean, x.shape(), &w0, hi, target_index, config)?;
    let first_succeeded = first.best.is_some();
    record(first, hi);
    if first_succeeded {
        for _ in 1..config.c_steps {
            if hi <= lo || (hi - lo) <= 1e-6 * hi {
                break;
            }
            let mid = if lo <= 0.0 { hi / 8.0 } else { (lo * hi).sqrt() };
            let run = optimize(net, &clean, x.shape(), &w0, mid, target_index, config)?;
            let succeeded = run.best.is_some();
            record(run, mid);
            if succeeded {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    let adversarial = match &best_overall {
        Some((_, adv)) => match net.precision() {
            Precision::Single => {
                Tensor::from_f32(x.shape().to_vec(), adv.iter().map(|&v| v as f32).collect())?
            }
            Precision::Double => Tensor::from_f64(x.shape().to_vec(), adv.clone())?,
        },
        // No constant in range succeeded: hand back the clean input with the
        // search trace attached.
        None => x.clone(),
    };

    let budget = PerturbationBudget {
        norm: NormKind::L2,
        epsilon: f64::INFINITY,
        step: config.learning_rate,
        max_iters: config.iters,
    };
    let mut result = finish(
        net,
        x,
        adversarial,
        Some(target_index),
        &budget,
        total_iterations,
        false,
        |p| p == target_index,
    )?;
    result.search_trace = Some(trials);
    Ok(result)
}

fn optimize(
    net: &Network,
    clean: &[f64],
    shape: &[usize],
    w0: &[f64],
    c: f64,
    target: usize,
    config: &CwConfig,
) -> Result<RunOutcome> {
    let mut w = w0.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let classes = net.class_count();

    for _ in 0..config.iters {
        let tanh: Vec<f64> = w.iter().map(|v| v.tanh()).collect();
        let x_adv: Vec<f64> = tanh.iter().map(|t| (t + 1.0) / 2.0).collect();
        let x_tensor = to_net_precision(net, shape, &x_adv)?;

        let z = net.logits(&x_tensor)?.to_f64_vec();
        let (runner_up, runner_up_value) = best_other(&z, target);
        let objective_active = runner_up_value - z[target] > -config.confidence;

        if argmax(&z) == target {
            let l2 = l2_norm(&x_adv, clean);
            if best.as_ref().map_or(true, |(b, _)| l2 < *b) {
                best = Some((l2, x_adv.clone()));
            }
        }

        // d objective / d x', then pulled through the tanh reparameterization.
        let logit_pull = if objective_active && c > 0.0 {
            let mut cot = vec![0.0f64; classes];
            cot[runner_up] = 1.0;
            cot[target] = -1.0;
            let cot = to_net_precision(net, &[classes], &cot)?;
            Some(
                net.output_gradient(&x_tensor, &cot, OutputStage::Logits)?
                    .to_f64_vec(),
            )
        } else {
            None
        };
        for i in 0..w.len() {
            let mut grad = 2.0 * (x_adv[i] - clean[i]);
            if let Some(pull) = &logit_pull {
                grad += c * pull[i];
            }
            let dxdw = (1.0 - tanh[i] * tanh[i]) / 2.0;
            w[i] -= config.learning_rate * grad * dxdw;
        }
    }

    Ok(RunOutcome {
        best,
        iterations: config.iters,
    })
}

fn to_net_precision(net: &Network, shape: &[usize], values: &[f64]) -> Result<Tensor> {
    Ok(match net.precision() {
        Precision::Single => {
            Tensor::from_f32(shape.to_vec(), values.iter().map(|&v| v as f32).collect())?
        }
        Precision::Double => Tensor::from_f64(shape.to_vec(), values.to_vec())?,
    })
}

fn best_other(z: &[f64], target: usize) -> (usize, f64) {
    let mut index = usize::MAX;
    let mut value = f64::NEG_INFINITY;
    for (i, &v) in z.iter().enumerate() {
        if i != target && v > value {
            index = i;
            value = v;
        }
    }
    (index, value)
}

fn l2_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
