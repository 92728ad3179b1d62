//! Flat `key = value` run configuration. Defaults, then the config file,
//! then command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ecodec::control::{SmoothingInput, StrengthKind};
use ecodec::decoder::{DecodeConfig, DecodeMode, Target};
use ecodec::eval::ExperimentSettings;

/// A problem with the user's input; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const DEFAULTS: &[(&str, &str)] = &[
    ("data", "data/toy_dialogues.jsonl"),
    ("model_dir", "models"),
    ("out", "out"),
    ("split_seed", "13"),
    ("min_count", "2"),
    ("lm_order", "3"),
    ("lm_discount", "0.75"),
    ("buckets", "1024"),
    ("controller_seed", "101"),
    ("evaluator_seed", "9001"),
    ("mode", "eco"),
    ("lambda", "4"),
    ("k", "50"),
    ("tau_lm", "1"),
    ("tau_c", "1"),
    ("strength", "reciprocal"),
    ("smoothing", "prob"),
    ("max_len", "128"),
    ("targets", ""),
    ("attributes", "emotion"),
    ("grid", "0,0.05,0.1,0.2,0.5,1,2,4,8"),
    ("modes", "static,eco"),
    ("taus", "0.1,0.5,1,5,10"),
    ("reps", "5"),
    ("tolerance", "0.02"),
];

#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self {
            values: DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> anyhow::Result<()> {
        let key = key.trim().replace('-', "_");
        if !self.values.contains_key(&key) {
            return Err(usage(format!("unknown config key `{key}`")));
        }
        self.values.insert(key, value.into().trim().to_string());
        Ok(())
    }

    pub fn set_opt<V: ToString>(&mut self, key: &str, value: Option<V>) -> anyhow::Result<()> {
        match value {
            Some(v) => self.set(key, v.to_string()),
            None => Ok(()),
        }
    }

    pub fn load_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    i + 1
                ))
            })?;
            self.set(k, v)
                .map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        &self.values[key]
    }

    pub fn get<T: FromStr>(&self, key: &str) -> anyhow::Result<T>
    where
        T::Err: fmt::Display,
    {
        let v = self.raw(key);
        v.parse()
            .map_err(|e| usage(format!("bad value `{v}` for `{key}`: {e}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> anyhow::Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e| usage(format!("bad item `{s}` in `{key}`: {e}")))
            })
            .collect()
    }

    pub fn path(&self, key: &str) -> anyhow::Result<PathBuf> {
        let v = self.raw(key);
        if v.is_empty() {
            return Err(usage(format!("`{key}` must not be empty")));
        }
        Ok(PathBuf::from(v))
    }

    pub fn experiment(&self) -> anyhow::Result<ExperimentSettings> {
        let s = ExperimentSettings {
            split_seed: self.get("split_seed")?,
            min_count: self.get("min_count")?,
            lm_order: self.get("lm_order")?,
            lm_discount: self.get("lm_discount")?,
            buckets: self.get("buckets")?,
            controller_seed: self.get("controller_seed")?,
            evaluator_seed: self.get("evaluator_seed")?,
            ..ExperimentSettings::default()
        };
        Ok(s)
    }

    pub fn decode(&self) -> anyhow::Result<DecodeConfig<f64>> {
        let mode: DecodeMode = self.get("mode")?;
        let strength: StrengthKind = self.get("strength")?;
        let smoothing: SmoothingInput = self.get("smoothing")?;
        Ok(DecodeConfig {
            mode,
            lambda: self.get("lambda")?,
            k: self.get("k")?,
            tau_lm: self.get("tau_lm")?,
            tau_c: self.get("tau_c")?,
            strength,
            smoothing,
            max_len: self.get("max_len")?,
            targets: Target::parse_list(self.raw("targets")).map_err(|e| usage(e.to_string()))?,
            fixed_alpha: None,
        })
    }

    pub fn attributes(&self) -> anyhow::Result<Vec<String>> {
        let a: Vec<String> = self.list("attributes")?;
        if a.is_empty() {
            return Err(usage("`attributes` must name at least one attribute"));
        }
        Ok(a)
    }
}
