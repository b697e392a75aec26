//! Minimal dense-network engine: matrices, activations, forward and backward
//! passes, squared-error loss, Adam and the learning-rate schedule.
//!
//! Everything runs in `f64`; a given seed, architecture and data stream
//! determine every parameter bit-for-bit.

pub mod activation;
pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod matrix;
pub mod mlp;
pub mod schedule;

pub use activation::Activation;
pub use adam::AdamState;
pub use checkpoint::NetworkCheckpoint;
pub use loss::mse_loss;
pub use matrix::Matrix;
pub use mlp::{DenseLayer, ForwardCache, LayerGrads, Mlp, MlpGrads};
pub use schedule::LinearDecay;
