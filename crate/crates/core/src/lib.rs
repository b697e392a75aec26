//! Sensorimotor prediction: simulated agents, a siamese predictive model and
//! tools to compare its motor representation with the sensor's true position.

pub mod analysis;
pub mod env;
pub mod error;
pub mod experiment;
pub mod exploration;
pub mod model;
pub mod nn;
pub mod plot;
pub mod rng;

pub use error::{Error, Result};
