//! Training configuration and the plain-text key=value format.

use std::collections::BTreeMap;

use gradlab_tensor::Precision;

use crate::error::TrainError;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Base step size. The applied step is `learning_rate * temperature`,
    /// compensating the 1/T factor the temperature softmax puts on the loss
    /// gradient, so the same value trains comparably at any temperature.
    pub learning_rate: f64,
    /// Softmax temperature of the training loss; 1 is plain training.
    pub temperature: f64,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 12,
            batch_size: 128,
            learning_rate: 0.01,
            temperature: 1.0,
            seed: 42,
            precision: Precision::Single,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistillMode {
    Dual,
    Single,
}

impl DistillMode {
    pub fn name(self) -> &'static str {
        match self {
            DistillMode::Dual => "dual",
            DistillMode::Single => "single",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "dual" => Some(DistillMode::Dual),
            "single" => Some(DistillMode::Single),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistillationConfig {
    pub temperature: f64,
    pub mode: DistillMode,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for DistillationConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            temperature: 30.0,
            mode: DistillMode::Dual,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            seed: t.seed,
            precision: t.precision,
        }
    }
}

impl DistillationConfig {
    /// The per-phase training config (loss temperature comes from here).
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            temperature: self.temperature,
            seed: self.seed,
            precision: self.precision,
        }
    }
}

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped,
/// whitespace around keys and values is trimmed. Later keys override earlier
/// ones.
pub fn parse_key_value(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(TrainError::Config(format!(
                "line {}: expected key=value, got {raw:?}",
                number + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
