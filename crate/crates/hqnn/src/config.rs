//! Experiment configuration, read from one JSON document.
//!
//! Every field is optional and unknown keys are rejected. Defaults:
//!
//! | field | default |
//! |---|---|
//! | `data` | `{"source": "synthetic", "n_bars": 400, "regime": "walk"}` |
//! | `models` | all seven kinds |
//! | `features` | `[3]` |
//! | `protocols` | `["TimeSeriesSplit"]` |
//! | `n_splits` | 5 |
//! | `lookback` | 2 |
//! | `train` | batch 32, 500 epochs, lr 0.01, decay 0.99, patience 20, min delta 1e-5, validation 0.1 |
//! | `model` | hidden 16, fusion 8, layers 2 (HybridQNN1: 1) |
//! | `output_dir` | `results` |
//! | `seed` | 0, overridden by `HQNN_SEED` |
//! | `record_timing` | false |

use std::path::{Path, PathBuf};

use hqnn_core::models::{ModelKind, RegressorSpec};
use hqnn_core::synth::Regime;
use hqnn_core::train::{Protocol, TrainConfig, DEFAULT_SPLITS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SEED_ENV: &str = "HQNN_SEED";
pub const DEFAULT_BARS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
    },
    Synthetic {
        #[serde(default = "default_bars")]
        n_bars: usize,
        #[serde(default = "default_regime")]
        regime: Regime,
    },
}

fn default_bars() -> usize {
    DEFAULT_BARS
}

fn default_regime() -> Regime {
    Regime::Walk
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic {
            n_bars: DEFAULT_BARS,
            regime: Regime::Walk,
        }
    }
}

/// Optional model size overrides applied to every kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOverrides {
    pub layers: Option<usize>,
    pub hidden: Option<usize>,
    pub fusion: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub models: Vec<String>,
    pub features: Vec<usize>,
    pub protocols: Vec<Protocol>,
    pub n_splits: usize,
    pub lookback: usize,
    pub train: TrainConfig,
    pub model: ModelOverrides,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Wall-clock training time in the outputs; off keeps them byte-reproducible.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            models: ModelKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            features: vec![3],
            protocols: vec![Protocol::TimeSeriesSplit],
            n_splits: DEFAULT_SPLITS,
            lookback: 2,
            train: TrainConfig::default(),
            model: ModelOverrides::default(),
            output_dir: PathBuf::from("results"),
            seed: 0,
            record_timing: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown model kind `{0}`")]
    UnknownModel(String),
    #[error("invalid {name}: {source}", name = SEED_ENV)]
    SeedEnv { source: std::num::ParseIntError },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Applies `HQNN_SEED` when set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|source| ConfigError::SeedEnv { source })?;
        }
        Ok(())
    }

    pub fn model_kinds(&self) -> Result<Vec<ModelKind>, ConfigError> {
        self.models
            .iter()
            .map(|m| ModelKind::from_name(m).ok_or_else(|| ConfigError::UnknownModel(m.clone())))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model_kinds()?;
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.models.is_empty() || self.features.is_empty() || self.protocols.is_empty() {
            return invalid("models, features and protocols must be non-empty".into());
        }
        if let Some(k) = self.features.iter().find(|&&k| k == 0 || k > 9) {
            return invalid(format!("feature count {k} outside 1..=9"));
        }
        if self.lookback == 0 {
            return invalid("lookback must be positive".into());
        }
        self.train
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Spec for one grid cell, with size overrides applied.
    pub fn spec(&self, kind: ModelKind, k: usize, seed: u64) -> RegressorSpec {
        let mut spec = RegressorSpec::new(kind, k, seed);
        spec.lookback = self.lookback;
        if let Some(l) = self.model.layers {
            spec.layers = l;
        }
        if let Some(h) = self.model.hidden {
            spec.hidden = h;
        }
        if let Some(f) = self.model.fusion {
            spec.fusion = f;
        }
        spec
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&canonical))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Seed for a named component: the first eight bytes of
/// `sha256(master_le || component)`, little endian.
pub fn derive_seed(master: u64, component: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(component.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
