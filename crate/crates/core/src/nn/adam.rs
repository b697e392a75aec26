use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam moment estimates for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moments: Vec<Vec<f64>>,
    pub second_moments: Vec<Vec<f64>>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Zeroed moments for tensors of the given lengths, default hyperparameters.
    pub fn new(tensor_lens: impl IntoIterator<Item = usize>) -> Self {
        let lens: Vec<usize> = tensor_lens.into_iter().collect();
        Self {
            first_moments: lens.iter().map(|&n| vec![0.0; n]).collect(),
            second_moments: lens.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// One bias-corrected Adam update applied in place.
    ///
    /// `params` and `grads` must list tensors in the order used at construction.
    pub fn step<'a, 'b>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut [f64]>,
        grads: impl IntoIterator<Item = &'b [f64]>,
        lr: f64,
    ) -> Result<()> {
        if lr.is_nan() || lr <= 0.0 {
            return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
        }
        let params: Vec<&mut [f64]> = params.into_iter().collect();
        let grads: Vec<&[f64]> = grads.into_iter().collect();
        if params.len() != self.first_moments.len() || grads.len() != params.len() {
            return Err(Error::Shape(format!(
                "optimizer tracks {} tensors, got {} parameters and {} gradients",
                self.first_moments.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
            if p.len() != g.len() || p.len() != self.first_moments[i].len() {
                return Err(Error::Shape(format!("tensor {i}: parameter/gradient/moment lengths differ")));
            }
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(&mut self.first_moments)
            .zip(&mut self.second_moments)
        {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
