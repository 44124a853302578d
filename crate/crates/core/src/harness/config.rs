//! Flat `key = value` experiment configuration.
//!
//! The same keys are accepted from a file and from command-line flags (with
//! `-` in flag names read as `_`). A key given in both places is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::HarnessError;

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "problem",
    "bc",
    "nu",
    "re",
    "wave_speed",
    "kappa",
    "amp",
    "order",
    "resolution",
    "extent",
    "n_data",
    "n_train",
    "nt",
    "m",
    "multistep",
    "t_final",
    "seed",
    "epochs",
    "lr",
    "batch_size",
    "decay_every",
    "baseline",
    "mollifier",
    "modes",
    "width",
    "out",
    "data",
    "checkpoint",
    "trials",
    "filter",
    "inject_fault",
    "split",
];

/// Raw key/value pairs, validated against [`KEYS`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().replace('-', "_");
            check_key(&key)?;
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(usage(format!("config line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Result<Self, HarnessError> {
        let mut values = BTreeMap::new();
        for (k, v) in pairs {
            let key = k.replace('-', "_");
            check_key(&key)?;
            values.insert(key, v);
        }
        Ok(Self { values })
    }

    /// Union of file and flag settings; a key present in both is an error.
    pub fn merge(file: Self, flags: Self) -> Result<Self, HarnessError> {
        let mut values = file.values;
        for (k, v) in flags.values {
            if let Some(old) = values.get(&k) {
                return Err(usage(format!("{k} is set in the config file ({old}) and by a flag ({v})")));
            }
            values.insert(k, v);
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unknown key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| usage(format!("bad value for {key}: {v:?}"))))
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, HarnessError> {
        match self.raw(key) {
            None => Ok(false),
            Some("" | "true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(usage(format!("bad value for {key}: {v:?} (expected true or false)"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, HarnessError> {
        self.path(key).ok_or_else(|| usage(format!("--{} is required", key.replace('_', "-"))))
    }

    /// Rejects keys that the command does not use.
    pub fn only(&self, allowed: &[&str]) -> Result<(), HarnessError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(usage(format!("{k} does not apply to this command"))),
            None => Ok(()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}

fn check_key(key: &str) -> Result<(), HarnessError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(usage(format!("unknown key {key}")))
    }
}

/// The file must exist.
pub fn existing_file(path: &Path, what: &str) -> Result<(), HarnessError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} {} does not exist", path.display())))
    }
}

/// The parent directory of an output path must exist.
pub fn writable_target(path: &Path) -> Result<(), HarnessError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(usage(format!("output directory {} does not exist", parent.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let c = ExperimentConfig::parse("# run\nproblem = heat\nnu=0.1 # viscosity\n\nbaseline = true\n").unwrap();
        assert_eq!(c.raw("problem"), Some("heat"));
        assert_eq!(c.get::<f64>("nu").unwrap(), Some(0.1));
        assert!(c.flag("baseline").unwrap());
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(HarnessError::Usage(_))));
        assert!(matches!(ExperimentConfig::parse("nu 0.1"), Err(HarnessError::Usage(_))));
        assert!(matches!(ExperimentConfig::parse("nu=1\nnu=2"), Err(HarnessError::Usage(_))));
        assert!(matches!(c.get::<usize>("problem"), Err(HarnessError::Usage(_))));
    }

    #[test]
    fn conflicts_are_errors() {
        let file = ExperimentConfig::parse("seed = 1\nepochs = 3").unwrap();
        let flags = ExperimentConfig::from_pairs([("seed".to_string(), "2".to_string())]).unwrap();
        assert!(matches!(ExperimentConfig::merge(file.clone(), flags), Err(HarnessError::Usage(_))));
        let flags = ExperimentConfig::from_pairs([("lr".to_string(), "0.01".to_string())]).unwrap();
        let m = ExperimentConfig::merge(file, flags).unwrap();
        assert_eq!(m.get::<usize>("epochs").unwrap(), Some(3));
        assert_eq!(m.get::<f64>("lr").unwrap(), Some(0.01));
    }
}
