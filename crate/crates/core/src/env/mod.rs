//! Simulated agent–environment setups.
//!
//! Two setups share one interface: a motor state `m` (three reals) produces a
//! sensor position `p` in the agent's egocentric frame and, given the current
//! environment translation, a sensory state `s`.

pub mod arm;
pub mod grid;

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use arm::{arm_kinematics, ArmRoom, SceneObject, SensorKind, SensorSpec, ShapeKind};
pub use grid::GridWorld;

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type MotorState = [f64; 3];
pub type Position = [f64; 2];

pub const MOTOR_DIM: usize = 3;
pub const SCENE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupKind {
    GridWorld,
    ArmDistance,
    ArmRgb,
}

impl SetupKind {
    pub fn sensory_dim(self) -> usize {
        match self {
            SetupKind::GridWorld => grid::GRID_SENSORS,
            SetupKind::ArmDistance => arm::DISTANCE_RAYS,
            SetupKind::ArmRgb => 3 * arm::RGB_PIXELS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SetupKind::GridWorld => "grid_world",
            SetupKind::ArmDistance => "arm_distance",
            SetupKind::ArmRgb => "arm_rgb",
        }
    }
}

impl std::str::FromStr for SetupKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid_world" => Ok(SetupKind::GridWorld),
            "arm_distance" => Ok(SetupKind::ArmDistance),
            "arm_rgb" => Ok(SetupKind::ArmRgb),
            other => Err(format!("unknown setup `{other}`")),
        }
    }
}

/// Environment state, including its current translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Scene {
    GridWorld(GridWorld),
    ArmRoom(ArmRoom),
}

impl Scene {
    pub fn random(setup: SetupKind, rng: &mut Rng) -> Result<Self> {
        Ok(match setup {
            SetupKind::GridWorld => Scene::GridWorld(GridWorld::random(rng)),
            SetupKind::ArmDistance => Scene::ArmRoom(ArmRoom::random(SensorKind::DistanceRing, rng)?),
            SetupKind::ArmRgb => Scene::ArmRoom(ArmRoom::random(SensorKind::RgbPanorama, rng)?),
        })
    }

    pub fn setup(&self) -> SetupKind {
        match self {
            Scene::GridWorld(_) => SetupKind::GridWorld,
            Scene::ArmRoom(r) => match r.sensor.kind {
                SensorKind::DistanceRing => SetupKind::ArmDistance,
                SensorKind::RgbPanorama => SetupKind::ArmRgb,
            },
        }
    }

    pub fn sensory_dim(&self) -> usize {
        self.setup().sensory_dim()
    }

    /// Egocentric sensor position reached by `m`.
    pub fn position(&self, m: &MotorState) -> Result<Position> {
        match self {
            Scene::GridWorld(_) => GridWorld::position(m),
            Scene::ArmRoom(_) => arm_kinematics(m),
        }
    }

    /// Sensory state for `m`, or `None` when the configuration is impossible.
    pub fn sense(&self, m: &MotorState) -> Result<Option<Vec<f64>>> {
        match self {
            Scene::GridWorld(w) => w.sense(m).map(Some),
            Scene::ArmRoom(r) => r.sense(m),
        }
    }

    pub fn translated(&self, rng: &mut Rng) -> Result<Self> {
        Ok(match self {
            Scene::GridWorld(w) => Scene::GridWorld(w.translated(rng)),
            Scene::ArmRoom(r) => Scene::ArmRoom(r.translated(rng)?),
        })
    }

    /// The same scene with its translation reset to the initial placement.
    pub fn untranslated(&self) -> Self {
        match self {
            Scene::GridWorld(w) => Scene::GridWorld(GridWorld { translation: [0, 0], ..w.clone() }),
            Scene::ArmRoom(r) => Scene::ArmRoom(ArmRoom { translation: [0.0, 0.0], ..r.clone() }),
        }
    }

    pub fn sample_motor(&self, rng: &mut Rng) -> MotorState {
        match self {
            Scene::GridWorld(_) => GridWorld::sample_motor(rng),
            Scene::ArmRoom(_) => ArmRoom::sample_motor(rng),
        }
    }
}

/// Replayable scene document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub schema_version: u32,
    pub setup: SetupKind,
    pub seed: u64,
    pub scene: Scene,
}

impl SceneFile {
    pub fn new(scene: Scene, seed: u64) -> Self {
        Self { schema_version: SCENE_SCHEMA_VERSION, setup: scene.setup(), seed, scene }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s)?;
        if f.schema_version != SCENE_SCHEMA_VERSION {
            return Err(Error::Version { found: f.schema_version, expected: SCENE_SCHEMA_VERSION });
        }
        if f.scene.setup() != f.setup {
            return Err(Error::Provenance(format!(
                "scene is a {} but the file declares {}",
                f.scene.setup().as_str(),
                f.setup.as_str()
            )));
        }
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fixed, deterministic sampling of the motor space used for every evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorGrid {
    pub motors: Vec<MotorState>,
    pub positions: Vec<Position>,
    /// Index of the distinct position each motor state reaches; motor states
    /// with equal labels are redundant.
    pub labels: Vec<usize>,
}

impl MotorGrid {
    pub fn len(&self) -> usize {
        self.motors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motors.is_empty()
    }

    pub fn distinct_positions(&self) -> usize {
        self.labels.iter().max().map_or(0, |&l| l + 1)
    }

    /// The regular motor sampling of a scene.
    ///
    /// Grid world: the 25 workspace cells × `m₃ ∈ {0, 0.5, 1}`. Arm: five
    /// evenly spaced angles per joint over `[-π, π]`, keeping configurations
    /// that are valid in the untranslated scene.
    pub fn regular(scene: &Scene) -> Result<Self> {
        let mut motors = Vec::new();
        match scene {
            Scene::GridWorld(_) => {
                for x in 0..grid::WORKSPACE_SIZE {
                    for y in 0..grid::WORKSPACE_SIZE {
                        for m3 in [0.0, 0.5, 1.0] {
                            let (x, y) = (x as f64, y as f64);
                            motors.push([x * x, y * y, m3]);
                        }
                    }
                }
            }
            Scene::ArmRoom(_) => {
                let home = scene.untranslated();
                let angles: Vec<f64> = (0..5).map(|k| -PI + k as f64 * PI / 2.0).collect();
                for &a in &angles {
                    for &b in &angles {
                        for &c in &angles {
                            let m = [a, b, c];
                            if home.sense(&m)?.is_some() {
                                motors.push(m);
                            }
                        }
                    }
                }
            }
        }
        let positions = motors.iter().map(|m| scene.position(m)).collect::<Result<Vec<_>>>()?;
        let labels = group_labels(&positions, 1e-9);
        Ok(Self { motors, positions, labels })
    }
}

/// Labels points by first occurrence, merging points closer than `tol` per axis.
fn group_labels(points: &[Position], tol: f64) -> Vec<usize> {
    let mut reps: Vec<Position> = Vec::new();
    points
        .iter()
        .map(|p| {
            if let Some(i) = reps
                .iter()
                .position(|r| (r[0] - p[0]).abs() <= tol && (r[1] - p[1]).abs() <= tol)
            {
                i
            } else {
                reps.push(*p);
                reps.len() - 1
            }
        })
        .collect()
}
