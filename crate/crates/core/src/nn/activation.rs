use serde::{Deserialize, Serialize};

/// SELU scale.
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
/// SELU negative-branch saturation.
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Selu,
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Selu => {
                if x > 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed from the pre-activation `x`.
    ///
    /// At exactly 0 SELU takes its right-hand slope λ and ReLU takes 0.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Selu => {
                if x >= 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }

    pub fn apply_slice(self, xs: &mut [f64]) {
        if self != Activation::Linear {
            xs.iter_mut().for_each(|x| *x = self.apply(*x));
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "selu" => Ok(Activation::Selu),
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selu_values() {
        assert_eq!(Activation::Selu.apply(0.0), 0.0);
        assert_eq!(Activation::Selu.apply(2.0), 2.101401974710961);
        // λα(e^{-1} − 1), evaluated independently
        let expected = -SELU_LAMBDA * SELU_ALPHA * (1.0 - (-1.0f64).exp());
        assert!((Activation::Selu.apply(-1.0) - expected).abs() < 1e-15);
        assert!((Activation::Selu.apply(-1.0) - (-1.1113307)).abs() < 1e-6);
    }

    #[test]
    fn relu_and_linear() {
        assert_eq!(Activation::Relu.apply(-3.0), 0.0);
        assert_eq!(Activation::Relu.apply(1.5), 1.5);
        assert_eq!(Activation::Linear.apply(-7.25), -7.25);
    }

    #[test]
    fn selu_continuous_and_monotone() {
        let eps = 1e-12;
        assert!((Activation::Selu.apply(eps) - Activation::Selu.apply(-eps)).abs() < 1e-11);
        let grid: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 1e-3).collect();
        for w in grid.windows(2) {
            assert!(Activation::Selu.apply(w[1]) > Activation::Selu.apply(w[0]));
        }
    }

    #[test]
    fn selu_derivative_at_zero_is_right_limit() {
        assert_eq!(Activation::Selu.derivative(0.0), SELU_LAMBDA);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        for kind in [Activation::Selu, Activation::Relu, Activation::Linear] {
            for &x in &[-2.3, -0.4, 0.7, 3.1] {
                let fd = (kind.apply(x + h) - kind.apply(x - h)) / (2.0 * h);
                assert!((fd - kind.derivative(x)).abs() < 1e-7, "{kind:?} at {x}");
            }
        }
    }
}
