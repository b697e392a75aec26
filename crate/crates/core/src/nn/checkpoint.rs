use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, AdamState, DenseLayer, Matrix, Mlp};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const NETWORK_CHECKPOINT_VERSION: u32 = 1;

/// Serializable snapshot of one network and, optionally, its optimizer and
/// random stream.
///
/// Parameters are flattened layer by layer (weights row-major, then biases).
/// JSON floats are written with shortest round-trip formatting, so a
/// save/load cycle is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub parameters: Vec<f64>,
    pub adam: Option<AdamState>,
    pub epoch: u64,
    pub rng: Option<Rng>,
}

impl NetworkCheckpoint {
    pub fn capture(mlp: &Mlp, adam: Option<&AdamState>, epoch: u64, rng: Option<&Rng>) -> Self {
        Self {
            version: NETWORK_CHECKPOINT_VERSION,
            layer_sizes: mlp.sizes(),
            activations: mlp.layers().iter().map(|l| l.activation).collect(),
            parameters: mlp.tensors().flatten().copied().collect(),
            adam: adam.cloned(),
            epoch,
            rng: rng.cloned(),
        }
    }

    pub fn to_mlp(&self) -> Result<Mlp> {
        if self.version != NETWORK_CHECKPOINT_VERSION {
            return Err(Error::Version { found: self.version, expected: NETWORK_CHECKPOINT_VERSION });
        }
        if self.layer_sizes.len() != self.activations.len() + 1 {
            return Err(Error::Shape("one activation per layer required".into()));
        }
        let mut rest = self.parameters.as_slice();
        let mut layers = Vec::with_capacity(self.activations.len());
        for (w, &activation) in self.layer_sizes.windows(2).zip(&self.activations) {
            let (n_in, n_out) = (w[0], w[1]);
            let need = n_in * n_out + n_out;
            if rest.len() < need {
                return Err(Error::Shape("checkpoint has too few parameters".into()));
            }
            let (weights, tail) = rest.split_at(n_in * n_out);
            let (biases, tail) = tail.split_at(n_out);
            layers.push(DenseLayer {
                weights: Matrix::from_vec(n_in, n_out, weights.to_vec())?,
                biases: biases.to_vec(),
                activation,
            });
            rest = tail;
        }
        if !rest.is_empty() {
            return Err(Error::Shape("checkpoint has trailing parameters".into()));
        }
        Mlp::from_layers(layers)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        if ck.version != NETWORK_CHECKPOINT_VERSION {
            return Err(Error::Version { found: ck.version, expected: NETWORK_CHECKPOINT_VERSION });
        }
        Ok(ck)
    }
}
