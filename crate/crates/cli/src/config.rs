//! Layered configuration: defaults, then the `--config` key=value file, then
//! command-line flags. Whatever a command actually resolves is echoed into
//! the run manifest, so the manifest alone re-runs the experiment.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{validation, Result};

pub struct Config {
    file: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            None => BTreeMap::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    validation(format!("cannot read config {}: {e}", path.display()))
                })?;
                gradlab_train::parse_key_value(&text)
                    .map_err(|e| validation(format!("{}: {e}", path.display())))?
            }
        };
        Ok(Self {
            file,
            resolved: RefCell::new(BTreeMap::new()),
        })
    }

    /// Flag beats file beats default; the winner lands in the manifest.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: Display + FromStr + Clone,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(raw) => raw
                    .parse::<T>()
                    .map_err(|e| validation(format!("config key {key}={raw}: {e}")))?,
                None => default,
            },
        };
        self.record(key, &value);
        Ok(value)
    }

    /// As `resolve`, but absent everywhere stays absent.
    pub fn resolve_opt<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: Display + FromStr + Clone,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(
                    raw.parse::<T>()
                        .map_err(|e| validation(format!("config key {key}={raw}: {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.record(key, v);
        }
        Ok(value)
    }

    pub fn record(&self, key: &str, value: &dyn Display) {
        self.resolved
            .borrow_mut()
            .insert(key.to_string(), value.to_string());
    }

    /// Sorted key=value dump of everything the run resolved.
    pub fn manifest(&self, command: &str) -> String {
        let mut out = format!("command={command}\n");
        for (key, value) in self.resolved.borrow().iter() {
            out.push_str(&format!("{key}={value}\n"));
        }
        out
    }
}

/// The four conventional dataset files under one directory.
pub struct DataPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl DataPaths {
    pub fn resolve(config: &Config, data_dir: Option<&Path>) -> Result<Self> {
        let dir = config.resolve_opt(
            "data.dir",
            data_dir.map(|p| p.display().to_string()),
        )?;
        let dir = dir.ok_or_else(|| validation("no dataset location; pass --data-dir"))?;
        let base = PathBuf::from(dir);
        Ok(Self {
            train_images: base.join("train-images-idx3-ubyte"),
            train_labels: base.join("train-labels-idx1-ubyte"),
            test_images: base.join("t10k-images-idx3-ubyte"),
            test_labels: base.join("t10k-labels-idx1-ubyte"),
        })
    }
}
