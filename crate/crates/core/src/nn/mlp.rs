//! Dense feed-forward networks with an exact reverse pass.
//!
//! A layer computes `act(X·W + b)` on a batch `X` with one sample per row, so
//! weights are stored `in_dim × out_dim`.

use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::matrix::{gemm, Matrix};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    /// LeCun-normal weights (σ = 1/√in_dim), zero biases.
    pub fn lecun(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Config(format!("layer dimensions must be ≥ 1, got {in_dim}x{out_dim}")));
        }
        let std = 1.0 / (in_dim as f64).sqrt();
        let values = (0..in_dim * out_dim).map(|_| std * rng.standard_normal()).collect();
        Ok(Self {
            weights: Matrix::from_vec(in_dim, out_dim, values)?,
            biases: vec![0.0; out_dim],
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.cols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Intermediate values of one forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Pre-activation of each layer.
    pre: Vec<Matrix>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.inputs.first().map_or(0, Matrix::rows)
    }
}

/// Gradients with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl MlpGrads {
    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.biases.as_slice()])
    }

    pub fn is_zero(&self) -> bool {
        self.tensors().all(|t| t.iter().all(|&v| v == 0.0))
    }
}

impl Mlp {
    /// Builds a network through `layer_sizes` (input, hidden..., output).
    ///
    /// Hidden layers use `hidden_activation`; the output layer is linear.
    pub fn new(layer_sizes: &[usize], hidden_activation: Activation, rng: &mut Rng) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "an MLP needs at least input and output sizes, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Config(format!("layer sizes must be ≥ 1, got {layer_sizes:?}")));
        }
        let last = layer_sizes.len() - 2;
        let layers = layer_sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let act = if k == last { Activation::Linear } else { hidden_activation };
                DenseLayer::lecun(w[0], w[1], act, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("an MLP needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape(format!(
                    "layer {k} outputs {} but layer {} expects {}",
                    pair[0].out_dim(),
                    k + 1,
                    pair[1].in_dim()
                )));
            }
        }
        for l in &layers {
            if l.biases.len() != l.out_dim() || l.in_dim() == 0 || l.out_dim() == 0 {
                return Err(Error::Shape("bias length must equal layer output width".into()));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Layer widths from input to output.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.in_dim()).chain(self.layers.iter().map(DenseLayer::out_dim)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.biases.len()).sum()
    }

    /// Parameter tensors in a fixed order (weights then biases, layer by layer).
    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.biases.as_slice()])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.biases.as_mut_slice()])
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.in_dim() {
            return Err(Error::Shape(format!(
                "network expects {} input columns, got {}",
                self.in_dim(),
                input.cols()
            )));
        }
        Ok(())
    }

    /// Forward pass without keeping intermediates.
    pub fn infer(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let mut x = input.clone();
        for layer in &self.layers {
            x = affine(layer, &x);
            layer.activation.apply_slice(x.as_mut_slice());
        }
        Ok(x)
    }

    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let z = affine(layer, &x);
            let mut a = z.clone();
            layer.activation.apply_slice(a.as_mut_slice());
            inputs.push(x);
            pre.push(z);
            x = a;
        }
        Ok((x, ForwardCache { inputs, pre }))
    }

    /// Reverse pass: parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &Matrix) -> Result<(MlpGrads, Matrix)> {
        if cache.pre.len() != self.layers.len()
            || cache
                .pre
                .iter()
                .zip(&self.layers)
                .any(|(z, l)| z.cols() != l.out_dim())
        {
            return Err(Error::Shape("forward cache does not belong to this network".into()));
        }
        let batch = cache.batch_size();
        if output_grad.rows() != batch || output_grad.cols() != self.out_dim() {
            return Err(Error::Shape(format!(
                "output gradient is {}x{}, expected {batch}x{}",
                output_grad.rows(),
                output_grad.cols(),
                self.out_dim()
            )));
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = output_grad.clone();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            if layer.activation != Activation::Linear {
                for (d, &z) in delta.as_mut_slice().iter_mut().zip(cache.pre[k].as_slice()) {
                    *d *= layer.activation.derivative(z);
                }
            }
            let mut dw = Matrix::zeros(layer.in_dim(), layer.out_dim());
            gemm(&cache.inputs[k], true, &delta, false, &mut dw, 0.0);
            let mut db = vec![0.0; layer.out_dim()];
            for row in delta.iter_rows() {
                for (acc, v) in db.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            let mut dx = Matrix::zeros(batch, layer.in_dim());
            gemm(&delta, false, &layer.weights, true, &mut dx, 0.0);
            grads.push(LayerGrads { weights: dw, biases: db });
            delta = dx;
        }
        grads.reverse();
        Ok((MlpGrads { layers: grads }, delta))
    }
}

fn affine(layer: &DenseLayer, x: &Matrix) -> Matrix {
    let mut z = Matrix::zeros(x.rows(), layer.out_dim());
    for i in 0..z.rows() {
        z.row_mut(i).copy_from_slice(&layer.biases);
    }
    gemm(x, false, &layer.weights, false, &mut z, 1.0);
    z
}
