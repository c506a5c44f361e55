use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channels::ChannelModel;
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::modulation::Modulation;
use crate::seeds::SubSeeds;
use crate::vgan::TrainConfig;

/// One experiment, as read from a TOML file.
///
/// ```toml
/// name = "bpsk-awgn-gan"
/// modulation = "bpsk"
/// seed = 1
/// output_dir = "runs/bpsk-awgn-gan"
///
/// [channel]
/// kind = "awgn"
/// noise_std = 1.0
///
/// [train]
/// objective = "gan"
/// iterations = 10000
///
/// [eval]
/// bins = 100
/// ```
///
/// `seed` is the master seed: it replaces `train.seed` and `eval.seed` on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub modulation: Modulation,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub channel: ChannelModel,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let seed = cfg.seed;
        let cfg = cfg.with_seed(seed);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Sets the master seed and the sub-seeds derived from it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.train.seed = seed;
        self.eval.seed = SubSeeds::from_master(seed).eval;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        self.channel
            .validate()
            .map_err(|e| prefixed("channel", e))?;
        if self.modulation.dim() != self.channel.dim() {
            return Err(Error::Config(format!(
                "modulation {:?} is {}-dimensional but channel {} expects {} dimensions",
                self.modulation,
                self.modulation.dim(),
                self.channel.name(),
                self.channel.dim()
            )));
        }
        self.train.validate().map_err(|e| prefixed("train", e))?;
        self.eval.validate()
    }
}

fn prefixed(section: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{section}: {m}")),
        other => other,
    }
}
