//! Training run configuration file.
//!
//! ```json
//! {
//!   "profile": "desk",
//!   "mode": "templated",
//!   "corpus": "synth.jsonl",
//!   "split": {"train": 0.7, "validation": 0.15, "test": 0.15},
//!   "seed": 7,
//!   "output_dir": "run",
//!   "model": {"dropout": 0.0},
//!   "train": {"epochs": 10},
//!   "bounds": {"max_rows": 32},
//!   "min_freq": 1
//! }
//! ```
//!
//! Only `profile` is required apart from the data. `model`, `train` and
//! `bounds` are partial overrides on top of the profile. Data comes either from
//! `corpus`, which is split, or from `train_corpus` plus an optional
//! `validation_corpus`. Relative paths resolve against the config file's
//! directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chart2text::corpus::SplitRatios;
use chart2text::encoding::SummaryMode;
use chart2text::pipeline::PipelineConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Profile,
    #[serde(default = "default_mode")]
    pub mode: SummaryMode,
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub train_corpus: Option<PathBuf>,
    #[serde(default)]
    pub validation_corpus: Option<PathBuf>,
    #[serde(default)]
    pub split: SplitRatios,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: Option<Value>,
    #[serde(default)]
    pub train: Option<Value>,
    #[serde(default)]
    pub bounds: Option<Value>,
    #[serde(default)]
    pub min_freq: Option<usize>,
}

fn default_mode() -> SummaryMode {
    SummaryMode::Templated
}

/// Overwrites keys of `base` with those of `patch`; unknown keys are errors.
fn merge(section: &str, base: &mut Value, patch: &Value) -> anyhow::Result<()> {
    let (Value::Object(base), Value::Object(patch)) = (base, patch) else {
        bail!("`{section}` must be a JSON object");
    };
    for (k, v) in patch {
        match base.get_mut(k) {
            Some(slot) => *slot = v.clone(),
            None => bail!("unknown field `{section}.{k}`"),
        }
    }
    Ok(())
}

fn patched<T: Serialize + serde::de::DeserializeOwned>(section: &str, base: &T, patch: Option<&Value>) -> anyhow::Result<T> {
    let Some(patch) = patch else {
        return Ok(serde_json::from_value(serde_json::to_value(base)?)?);
    };
    let mut v = serde_json::to_value(base)?;
    merge(section, &mut v, patch)?;
    serde_json::from_value(v).with_context(|| format!("invalid `{section}` section"))
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.corpus, &mut cfg.train_corpus, &mut cfg.validation_corpus, &mut cfg.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// The profile with every override applied. The run seed drives the
    /// split, parameter initialization and batch order alike.
    pub fn pipeline(&self) -> anyhow::Result<PipelineConfig> {
        let base = match self.profile {
            Profile::Desk => PipelineConfig::desk(self.mode),
            Profile::Paper => PipelineConfig::paper(self.mode),
        };
        let mut train = patched("train", &base.train, self.train.as_ref())?;
        train.seed = self.seed;
        let cfg = PipelineConfig {
            mode: self.mode,
            model: patched("model", &base.model, self.model.as_ref())?,
            train,
            bounds: patched("bounds", &base.bounds, self.bounds.as_ref())?,
            min_freq: self.min_freq.unwrap_or(base.min_freq),
            model_seed: self.seed,
        };
        cfg.model.validate()?;
        cfg.train.validate()?;
        Ok(cfg)
    }
}
