use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::env::SetupKind;
use crate::error::{Error, Result};
use crate::exploration::ExplorationKind;
use crate::model::{TrainConfig, DEFAULT_DIM_H};
use crate::nn::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Paper,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(format!("unknown preset `{other}` (expected desk or paper)")),
        }
    }
}

/// Everything that determines the outputs of a run. Trial `k` uses seed
/// `base_seed + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub setup: SetupKind,
    pub exploration: ExplorationKind,
    /// Further regimes run side by side in a study, with overlay plots.
    #[serde(default)]
    pub compare: Vec<ExplorationKind>,
    pub dim_h: usize,
    pub activation: Activation,
    pub trials: usize,
    pub n_transitions: usize,
    pub base_seed: u64,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        let paper = Self {
            setup: SetupKind::GridWorld,
            exploration: ExplorationKind::Mmt,
            compare: Vec::new(),
            dim_h: DEFAULT_DIM_H,
            activation: Activation::Selu,
            trials: 10,
            n_transitions: 3_000_000,
            base_seed: 0,
            train: TrainConfig::default(),
        };
        match p {
            Preset::Paper => paper,
            Preset::Desk => Self {
                n_transitions: 200_000,
                train: TrainConfig {
                    max_epochs: 50_000,
                    decay_epochs: 25_000,
                    eval_every: 100,
                    ..TrainConfig::default()
                },
                ..paper
            },
        }
    }

    /// Regimes run by a study: `exploration` first, then `compare` without repeats.
    pub fn regimes(&self) -> Vec<ExplorationKind> {
        let mut out = vec![self.exploration];
        for k in &self.compare {
            if !out.contains(k) {
                out.push(*k);
            }
        }
        out
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_h == 0 || self.trials == 0 || self.n_transitions == 0 {
            return Err(Error::Config("dim_h, trials and n_transitions must be positive".into()));
        }
        if self.activation == Activation::Linear {
            return Err(Error::Config("hidden activation must be selu or relu".into()));
        }
        self.train.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }

    /// Builds a config from a preset, an optional partial JSON document and
    /// `dotted.name=value` overrides, applied in that order.
    pub fn resolve(preset: Preset, file: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = serde_json::to_value(Self::preset(preset))?;
        if let Some(text) = file {
            let patch: Value = serde_json::from_str(text)?;
            merge(&mut value, patch, "")?;
        }
        for (path, raw) in overrides {
            set_dotted(&mut value, path, raw)?;
        }
        let cfg: Self = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge(base: &mut Value, patch: Value, at: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let here = if at.is_empty() { k.clone() } else { format!("{at}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &here)?,
                    None => return Err(Error::Config(format!("unknown config field `{here}`"))),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn set_dotted(root: &mut Value, path: &str, raw: &str) -> Result<()> {
    let mut slot = &mut *root;
    for part in path.split('.') {
        slot = slot
            .get_mut(part)
            .ok_or_else(|| Error::Config(format!("unknown config field `{path}`")))?;
    }
    // Bare words (e.g. `MMT`, `grid_world`) are taken as strings.
    let parsed = match slot {
        Value::Array(_) => Value::Array(
            raw.split(',')
                .filter(|s| !s.is_empty())
                .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
                .collect(),
        ),
        _ => serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string())),
    };
    *slot = parsed;
    Ok(())
}
