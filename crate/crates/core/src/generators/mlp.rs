use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub const NAMES: [&'static str; 4] = ["tanh", "relu", "sigmoid", "identity"];

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            "sigmoid" => Some(Activation::Sigmoid),
            "identity" | "linear" => Some(Activation::Identity),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    fn apply(self, pre: f64) -> f64 {
        match self {
            Activation::Tanh => pre.tanh(),
            Activation::Relu => pre.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-pre).exp()),
            Activation::Identity => pre,
        }
    }

    /// Derivative expressed through the pre-activation and output.
    /// relu takes the subgradient 0 at exactly 0.
    fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Identity => 1.0,
        }
    }
}

/// One affine layer followed by an elementwise activation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn d_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.weights.nrows()
    }
}

/// Fully connected network `f = σ_L ∘ A_L ∘ … ∘ σ_1 ∘ A_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub(crate) layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn forward(&self, z: &DVector<f64>) -> DVector<f64> {
        self.layers.iter().fold(z.clone(), |h, layer| {
            let mut pre = &layer.weights * h;
            pre += &layer.bias;
            pre.map(|p| layer.activation.apply(p))
        })
    }

    pub(crate) fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut h = z.clone();
        let mut jac = DMatrix::identity(z.len(), z.len());
        for layer in &self.layers {
            let mut pre = &layer.weights * &h;
            pre += &layer.bias;
            let out = pre.map(|p| layer.activation.apply(p));
            let mut local = &layer.weights * &jac;
            for (i, mut row) in local.row_iter_mut().enumerate() {
                row *= layer.activation.derivative(pre[i], out[i]);
            }
            jac = local;
            h = out;
        }
        jac
    }

    /// Smallest `|pre-activation|` over all relu units at `z`, or `None` if
    /// the network has no relu layer.
    pub fn min_relu_margin(&self, z: &DVector<f64>) -> Option<f64> {
        let mut h = z.clone();
        let mut margin: Option<f64> = None;
        for layer in &self.layers {
            let mut pre = &layer.weights * &h;
            pre += &layer.bias;
            if layer.activation == Activation::Relu {
                let m = pre.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
                margin = Some(margin.map_or(m, |old| old.min(m)));
            }
            h = pre.map(|p| layer.activation.apply(p));
        }
        margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn sigmoid_and_relu_derivatives() {
        let s = Activation::Sigmoid;
        let out = s.apply(0.0);
        assert_eq!(out, 0.5);
        assert_eq!(s.derivative(0.0, out), 0.25);
        assert_eq!(Activation::Relu.derivative(0.0, 0.0), 0.0);
        assert_eq!(Activation::Relu.derivative(1e-300, 1e-300), 1.0);
    }

    #[test]
    fn relu_margin() {
        let mlp = Mlp {
            layers: vec![DenseLayer {
                weights: dmatrix![1.0, 0.0; 0.0, 1.0],
                bias: dvector![0.0, -0.5],
                activation: Activation::Relu,
            }],
        };
        assert_eq!(mlp.min_relu_margin(&dvector![2.0, 0.4]), Some((0.4_f64 - 0.5).abs()));
    }
}
