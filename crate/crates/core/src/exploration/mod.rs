//! Training data under the three exploration regimes.
//!
//! * `MTM`: the environment moves between `(m_t, s_t)` and `(m_{t+1}, s_{t+1})`,
//!   so transitions are inconsistent.
//! * `MM`: the environment never moves.
//! * `MMT`: the environment moves after every [`MMT_PERIOD`] attempted
//!   transitions, never within one.
//!
//! Motor states are drawn uniformly; transitions where either sensory state
//! is unavailable are discarded and not counted.

pub mod dataset;

use serde::{Deserialize, Serialize};

pub use dataset::{Batch, ChannelNorm, Dataset, Normalization, Provenance, Transition, DEFAULT_BATCH_SIZE};

use crate::env::{Scene, SceneFile, MOTOR_DIM};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Attempted transitions between two environment translations under MMT.
pub const MMT_PERIOD: u64 = 100;
/// Full-scale dataset size.
pub const DEFAULT_TRANSITIONS: usize = 3_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplorationKind {
    #[serde(rename = "MTM")]
    Mtm,
    #[serde(rename = "MM")]
    Mm,
    #[serde(rename = "MMT")]
    Mmt,
}

impl ExplorationKind {
    pub const ALL: [ExplorationKind; 3] = [ExplorationKind::Mtm, ExplorationKind::Mm, ExplorationKind::Mmt];

    pub fn as_str(self) -> &'static str {
        match self {
            ExplorationKind::Mtm => "MTM",
            ExplorationKind::Mm => "MM",
            ExplorationKind::Mmt => "MMT",
        }
    }
}

impl std::fmt::Display for ExplorationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExplorationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MTM" => Ok(ExplorationKind::Mtm),
            "MM" => Ok(ExplorationKind::Mm),
            "MMT" => Ok(ExplorationKind::Mmt),
            other => Err(format!("unknown exploration `{other}`")),
        }
    }
}

/// Environment placements visited during generation, for replay and checks.
#[derive(Debug, Clone, Default)]
pub struct GenerationLog {
    /// Every environment state used, in order of first use.
    pub placements: Vec<Scene>,
    /// For each kept transition, the placement index used for `s_t` and for `s_{t+1}`.
    pub transition_placements: Vec<[usize; 2]>,
    /// Valid transitions collected under each placement (MMT bookkeeping).
    pub valid_per_placement: Vec<u64>,
}

/// Generates `n` valid transitions from `scene` (taken as the initial placement).
pub fn generate(scene: &Scene, kind: ExplorationKind, n: usize, seed: u64, rng: &mut Rng) -> Result<Dataset> {
    generate_logged(scene, kind, n, seed, rng).map(|(d, _)| d)
}

pub fn generate_logged(
    scene: &Scene,
    kind: ExplorationKind,
    n: usize,
    seed: u64,
    rng: &mut Rng,
) -> Result<(Dataset, GenerationLog)> {
    if n == 0 {
        return Err(Error::Config("at least one transition must be requested".into()));
    }
    let initial = scene.untranslated();
    let provenance = Provenance {
        setup: initial.setup(),
        exploration: kind,
        seed,
        scene: SceneFile::new(initial.clone(), seed),
        attempted: 0,
        discarded: 0,
        translations: 0,
    };
    let mut data = Dataset::new(MOTOR_DIM, initial.sensory_dim(), provenance);
    let mut log = GenerationLog { placements: vec![initial.clone()], valid_per_placement: vec![0], ..Default::default() };
    let mut current = initial;
    let mut current_idx = 0usize;
    let mut attempted: u64 = 0;
    let mut translations: u64 = 0;
    // Guards against scenes where valid configurations are (almost) impossible.
    let max_attempts = 1000 * n as u64 + 100_000;

    while data.len() < n {
        if attempted >= max_attempts {
            return Err(Error::Geometry(format!(
                "only {} valid transitions after {attempted} attempts",
                data.len()
            )));
        }
        attempted += 1;
        let m_t = current.sample_motor(rng);
        let s_t = current.sense(&m_t)?;
        let idx_t = current_idx;
        if kind == ExplorationKind::Mtm {
            current = current.translated(rng)?;
            translations += 1;
            log.placements.push(current.clone());
            log.valid_per_placement.push(0);
            current_idx = log.placements.len() - 1;
        }
        let m_next = current.sample_motor(rng);
        let s_next = current.sense(&m_next)?;
        if let (Some(s_t), Some(s_next)) = (s_t, s_next) {
            data.push(&m_t, &s_t, &m_next, &s_next)?;
            log.transition_placements.push([idx_t, current_idx]);
            log.valid_per_placement[current_idx] += 1;
        }
        if kind == ExplorationKind::Mmt && attempted.is_multiple_of(MMT_PERIOD) {
            current = current.translated(rng)?;
            translations += 1;
            log.placements.push(current.clone());
            log.valid_per_placement.push(0);
            current_idx = log.placements.len() - 1;
        }
    }
    let prov = data.provenance_mut();
    prov.attempted = attempted;
    prov.discarded = attempted - n as u64;
    prov.translations = translations;
    Ok((data, log))
}
