//! Minibatch SGD with a deterministic parallel gradient reduction.

use std::time::Instant;

use gradlab_data::LabeledDataset;
use gradlab_nn::Network;
use gradlab_tensor::{ParamGradient, Precision, Tensor, TensorError};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rayon::prelude::*;

use crate::config::TrainConfig;
use crate::error::TrainError;
use crate::report::TrainReport;
use crate::Result;

/// Fixed number of reduction slots per batch. Samples are summed sequentially
/// inside a slot and slots are combined in index order, so the floating-point
/// summation tree never depends on thread scheduling or core count.
const SUM_CHUNKS: usize = 8;

pub(crate) enum TargetSource<'a> {
    Hard(&'a [u8]),
    /// Row-major `[samples, classes]` soft distributions.
    Soft { rows: &'a [f64], classes: usize },
}

impl TargetSource<'_> {
    fn tensor_for(&self, index: usize, classes: usize, precision: Precision) -> Tensor {
        match self {
            TargetSource::Hard(labels) => {
                let hot = labels[index] as usize;
                match precision {
                    Precision::Single => {
                        let mut v = vec![0.0f32; classes];
                        v[hot] = 1.0;
                        Tensor::vector_f32(v)
                    }
                    Precision::Double => {
                        let mut v = vec![0.0f64; classes];
                        v[hot] = 1.0;
                        Tensor::vector_f64(v)
                    }
                }
            }
            TargetSource::Soft { rows, classes: c } => {
                let row = &rows[index * c..(index + 1) * c];
                match precision {
                    Precision::Single => {
                        Tensor::vector_f32(row.iter().map(|&v| v as f32).collect())
                    }
                    Precision::Double => Tensor::vector_f64(row.to_vec()),
                }
            }
        }
    }
}

/// Trains on hard labels. The loss is cross-entropy through a softmax at
/// `config.temperature`; the returned network's inference temperature is left
/// untouched.
pub fn sgd_train(
    net: Network,
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &TrainConfig,
) -> Result<(Network, TrainReport)> {
    train_loop(net, train, &TargetSource::Hard(train.labels()), test, config)
}

/// Trains on per-sample soft target distributions (`rows` is row-major
/// `[samples, classes]`), the student phase of dual distillation.
pub fn sgd_train_soft(
    net: Network,
    train: &LabeledDataset,
    soft_rows: &[f64],
    test: &LabeledDataset,
    config: &TrainConfig,
) -> Result<(Network, TrainReport)> {
    let classes = net.class_count();
    if soft_rows.len() != train.len() * classes {
        return Err(TrainError::SoftTargetCount {
            rows: soft_rows.len() / classes.max(1),
            samples: train.len(),
        });
    }
    train_loop(
        net,
        train,
        &TargetSource::Soft {
            rows: soft_rows,
            classes,
        },
        test,
        config,
    )
}

/// Fraction of `data` the network classifies correctly.
pub fn accuracy(net: &Network, data: &LabeledDataset) -> Result<f64> {
    check_shapes(net, data)?;
    let precision = net.precision();
    let hits = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let x = data.image(i, precision);
            match net.predict(&x) {
                Ok(predicted) if predicted == data.label(i) => Ok(1usize),
                Ok(_) => Ok(0usize),
                Err(e) => Err(TrainError::from(e)),
            }
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / data.len() as f64)
}

fn check_shapes(net: &Network, data: &LabeledDataset) -> Result<()> {
    if data.image_shape() != net.input_shape() {
        return Err(TrainError::InputShape {
            data: data.image_shape(),
            net: net.input_shape(),
        });
    }
    Ok(())
}

fn train_loop(
    mut net: Network,
    train: &LabeledDataset,
    targets: &TargetSource<'_>,
    test: &LabeledDataset,
    config: &TrainConfig,
) -> Result<(Network, TrainReport)> {
    let started = Instant::now();
    check_shapes(&net, train)?;
    check_shapes(&net, test)?;
    let classes = net.class_count();
    if let TargetSource::Hard(labels) = targets {
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(TrainError::LabelOutOfRange {
                label: bad as usize,
                classes,
            });
        }
    }
    let batch_size = config.batch_size.max(1);
    let precision = net.precision();
    let dropout = dropout_mask_plan(&net)?;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut indices: Vec<usize> = (0..train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut lr = config.learning_rate;
    let mut best_loss = f64::INFINITY;

    for epoch in 0..config.epochs {
        indices.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0f64;

        for batch in indices.chunks(batch_size) {
            let bounds: Vec<(usize, usize)> = (0..SUM_CHUNKS)
                .map(|c| {
                    (
                        batch.len() * c / SUM_CHUNKS,
                        batch.len() * (c + 1) / SUM_CHUNKS,
                    )
                })
                .collect();

            let partials: Vec<Result<ChunkSum>> = bounds
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut acc = ChunkSum::new(net.layers().len());
                    for &sample in &batch[lo..hi] {
                        let masks = sample_masks(&dropout, precision, config.seed, epoch, sample);
                        let mut record = net.training_record(config.temperature, &masks)?;
                        let x = train.image(sample, precision);
                        let target = targets.tensor_for(sample, classes, precision);
                        let back = match record.backward_loss(&x, &target) {
                            Ok(back) => back,
                            Err(e) if is_divergence(&e) => {
                                return Err(TrainError::Diverged { epoch })
                            }
                            Err(e) => return Err(e.into()),
                        };
                        if !back.loss.is_finite() {
                            return Err(TrainError::Diverged { epoch });
                        }
                        acc.add(back.loss, back.param_gradients)?;
                    }
                    Ok(acc)
                })
                .collect();

            let mut total = ChunkSum::new(net.layers().len());
            for partial in partials {
                total.merge(partial?)?;
            }
            loss_sum += total.loss;
            // The loss gradient through a temperature-T softmax carries a 1/T
            // factor; scaling the step by T keeps one learning rate usable
            // across temperatures (at T = 1 this is plain SGD).
            let step = lr * config.temperature / batch.len() as f64;
            net.apply_gradient_step(&total.grads, step)?;
        }

        let epoch_loss = loss_sum / train.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        epoch_losses.push(epoch_loss);
        log::info!("epoch {} loss {epoch_loss:.6} lr {lr}", epoch + 1);

        if epoch_loss + 1e-4 < best_loss {
            best_loss = epoch_loss;
        } else {
            lr = (lr * 0.5).max(config.learning_rate / 256.0);
            log::info!("plateau at epoch {}; learning rate now {lr}", epoch + 1);
        }
    }

    let test_accuracy = accuracy(&net, test)?;
    let report = TrainReport {
        epoch_losses,
        test_accuracy,
        wall_time: started.elapsed(),
        seed: config.seed,
        temperature: config.temperature,
    };
    Ok((net, report))
}

struct ChunkSum {
    loss: f64,
    grads: Vec<Option<ParamGradient>>,
}

impl ChunkSum {
    fn new(layers: usize) -> Self {
        Self {
            loss: 0.0,
            grads: (0..layers).map(|_| None).collect(),
        }
    }

    fn add(&mut self, loss: f64, sample: Vec<Option<ParamGradient>>) -> Result<()> {
        self.loss += loss;
        for (slot, grad) in self.grads.iter_mut().zip(sample) {
            let Some(grad) = grad else { continue };
            match slot {
                None => *slot = Some(grad),
                Some(acc) => {
                    acc.weight.add_scaled(&grad.weight, 1.0)?;
                    acc.bias.add_scaled(&grad.bias, 1.0)?;
                }
            }
        }
        Ok(())
    }

    fn merge(&mut self, other: ChunkSum) -> Result<()> {
        self.add(other.loss, other.grads)
    }
}

/// (rate, activation shape) for every dropout layer, in layer order.
fn dropout_mask_plan(net: &Network) -> Result<Vec<(f64, usize)>> {
    let shapes = net.activation_shapes()?;
    let mut plan = Vec::new();
    for (i, layer) in net.layers().iter().enumerate() {
        if let gradlab_nn::LayerSpec::Dropout { rate } = layer.spec {
            plan.push((rate, shapes[i].iter().product()));
        }
    }
    Ok(plan)
}

/// Inverted-dropout masks for one sample, keyed on (seed, epoch, sample), so
/// the mask stream is independent of batch composition and thread order.
fn sample_masks(
    plan: &[(f64, usize)],
    precision: Precision,
    seed: u64,
    epoch: usize,
    sample: usize,
) -> Vec<Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[0xD0, epoch as u64, sample as u64]));
    plan.iter()
        .map(|&(rate, len)| {
            let keep = 1.0 - rate;
            let values: Vec<f64> = (0..len)
                .map(|_| {
                    if rng.random_range(0.0..1.0) < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
                .collect();
            match precision {
                Precision::Single => {
                    Tensor::vector_f32(values.iter().map(|&v| v as f32).collect())
                }
                Precision::Double => Tensor::vector_f64(values),
            }
        })
        .collect()
}

fn is_divergence(e: &TensorError) -> bool {
    matches!(e, TensorError::InvalidOp { reason, .. } if reason.contains("non-finite"))
}

fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
