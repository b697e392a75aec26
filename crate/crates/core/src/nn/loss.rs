use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Mean over rows of the squared Euclidean prediction error, and its gradient
/// with respect to `pred`.
pub fn mse_loss(pred: &Matrix, truth: &Matrix) -> Result<(f64, Matrix)> {
    if pred.rows() != truth.rows() || pred.cols() != truth.cols() {
        return Err(Error::Shape(format!(
            "prediction is {}x{} but target is {}x{}",
            pred.rows(),
            pred.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    let k = pred.rows().max(1) as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut sum = 0.0;
    for ((g, p), t) in grad.as_mut_slice().iter_mut().zip(pred.as_slice()).zip(truth.as_slice()) {
        let d = p - t;
        sum += d * d;
        *g = 2.0 * d / k;
    }
    Ok((sum / k, grad))
}
