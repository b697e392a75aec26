//! Discrete toroidal world with smooth polynomial sensory fields.

use serde::{Deserialize, Serialize};

use super::{MotorState, Position};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Cells per side of the whole world.
pub const GRID_SIZE: usize = 10;
/// Cells per side of the region the agent can reach.
pub const WORKSPACE_SIZE: usize = 5;
/// Sensory channels per cell.
pub const GRID_SENSORS: usize = 4;
/// Monomials of a bivariate polynomial of order 3.
pub const MONOMIALS: usize = 10;

/// A 10×10 torus whose cells carry four sensory values, each a random cubic
/// polynomial of the cell coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWorld {
    /// One row of coefficients per sensory channel, over the monomials
    /// `1, x, y, x², xy, y², x³, x²y, xy², y³`.
    pub coeffs: [[f64; MONOMIALS]; GRID_SENSORS],
    /// Offset of the environment relative to the workspace, in cells.
    pub translation: [usize; 2],
}

impl GridWorld {
    /// Coefficients uniform in `[-1, 1]`, no translation.
    pub fn random(rng: &mut Rng) -> Self {
        let mut coeffs = [[0.0; MONOMIALS]; GRID_SENSORS];
        for row in &mut coeffs {
            for c in row.iter_mut() {
                *c = rng.uniform_in(-1.0, 1.0);
            }
        }
        Self { coeffs, translation: [0, 0] }
    }

    pub fn with_coeffs(coeffs: [[f64; MONOMIALS]; GRID_SENSORS]) -> Self {
        Self { coeffs, translation: [0, 0] }
    }

    /// `p = (√m₁, √m₂)`; the third motor command has no effect.
    pub fn position(m: &MotorState) -> Result<Position> {
        if !(m[0] >= 0.0 && m[1] >= 0.0) {
            return Err(Error::Domain(format!(
                "grid-world motor commands m1, m2 must be non-negative, got ({}, {})",
                m[0], m[1]
            )));
        }
        Ok([m[0].sqrt(), m[1].sqrt()])
    }

    /// Workspace cell addressed by a motor state.
    pub fn cell(m: &MotorState) -> Result<[usize; 2]> {
        let p = Self::position(m)?;
        let mut cell = [0usize; 2];
        for (c, &x) in cell.iter_mut().zip(&p) {
            let r = x.round();
            if (x - r).abs() > 1e-9 || r >= WORKSPACE_SIZE as f64 {
                return Err(Error::Domain(format!(
                    "position {x} is not a workspace cell index in 0..{WORKSPACE_SIZE}"
                )));
            }
            *c = r as usize;
        }
        Ok(cell)
    }

    /// Cell of the whole world under the current translation (wraps around).
    pub fn absolute_cell(&self, workspace_cell: [usize; 2]) -> [usize; 2] {
        [
            (workspace_cell[0] + self.translation[0]) % GRID_SIZE,
            (workspace_cell[1] + self.translation[1]) % GRID_SIZE,
        ]
    }

    /// Sensory values at an absolute cell.
    pub fn field(&self, cell: [usize; 2]) -> [f64; GRID_SENSORS] {
        let scale = (GRID_SIZE - 1) as f64;
        let x = cell[0] as f64 / scale;
        let y = cell[1] as f64 / scale;
        let basis = [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y];
        let mut out = [0.0; GRID_SENSORS];
        for (o, row) in out.iter_mut().zip(&self.coeffs) {
            *o = row.iter().zip(&basis).map(|(c, b)| c * b).sum();
        }
        out
    }

    pub fn sense(&self, m: &MotorState) -> Result<Vec<f64>> {
        let cell = Self::cell(m)?;
        Ok(self.field(self.absolute_cell(cell)).to_vec())
    }

    /// A new integer translation uniform over the whole world.
    pub fn translated(&self, rng: &mut Rng) -> Self {
        let translation = [rng.below(GRID_SIZE), rng.below(GRID_SIZE)];
        Self { translation, ..self.clone() }
    }

    /// Uniform workspace cell, encoded as `(x², y², m₃)` with `m₃ ∈ [0, 1)`.
    pub fn sample_motor(rng: &mut Rng) -> MotorState {
        let x = rng.below(WORKSPACE_SIZE) as f64;
        let y = rng.below(WORKSPACE_SIZE) as f64;
        [x * x, y * y, rng.uniform()]
    }
}
