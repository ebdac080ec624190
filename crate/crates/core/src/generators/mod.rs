//! Smooth generative maps `f: Z -> X` with exact Jacobians.

mod mlp;
mod radial;
mod weight_file;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use mlp::{Activation, DenseLayer, Mlp};
pub use radial::RadialWarp;
pub use weight_file::{WeightFile, SCHEMA_VERSION};

use crate::error::{GeodesicError, Result, WeightFileError};

/// Anything that can be evaluated and differentiated at a latent point.
pub trait Generator {
    fn d_z(&self) -> usize;
    fn d_x(&self) -> usize;
    fn forward(&self, z: &DVector<f64>) -> Result<DVector<f64>>;
    fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>>;
}

/// Affine map `f(z) = A z + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Mlp(Mlp),
    Linear(Linear),
    RadialWarp(RadialWarp),
}

/// Weight file of the 2-20-20-2 toy GAN trained on a ring with a hole.
pub const TOY_GAN_JSON: &str = include_str!("../../fixtures/toy_gan.json");

/// Names accepted by [`GeneratorSpec::builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["radial-warp", "identity", "lambertian", "toy-gan"];

impl GeneratorSpec {
    pub fn linear(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if offset.len() != matrix.nrows() {
            return Err(GeodesicError::DimensionMismatch {
                expected: matrix.nrows(),
                actual: offset.len(),
                context: "linear generator offset",
            });
        }
        if matrix.ncols() == 0 || matrix.ncols() > matrix.nrows() {
            return Err(GeodesicError::InvalidConfig(format!(
                "linear generator needs 1 ≤ d_z ≤ d_x, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(GeneratorSpec::Linear(Linear { matrix, offset }))
    }

    pub fn identity(dim: usize) -> Self {
        GeneratorSpec::Linear(Linear {
            matrix: DMatrix::identity(dim, dim),
            offset: DVector::zeros(dim),
        })
    }

    /// Builds an MLP from layers, checking that dimensions chain.
    pub fn mlp(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(GeodesicError::InvalidConfig("mlp needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].d_in() != pair[0].d_out() {
                return Err(GeodesicError::InvalidConfig(format!(
                    "layer {} takes {} inputs but layer {i} produces {}",
                    i + 1,
                    pair[1].d_in(),
                    pair[0].d_out()
                )));
            }
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.d_out() {
                return Err(GeodesicError::InvalidConfig(format!("layer {i} bias length mismatch")));
            }
        }
        Ok(GeneratorSpec::Mlp(Mlp { layers }))
    }

    /// Nonlinear parametrization of a 9-dimensional affine subspace of `R^64`:
    /// `f(z) = A tanh(1.2 Q z + b₁) + c` with `rank A = 9`. The image is convex, so
    /// the ambient straight segment between two image points is the geodesic.
    pub fn lambertian(seed: u64) -> Self {
        const D_Z: usize = 9;
        const D_X: usize = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |r: usize, c: usize| -> DMatrix<f64> {
            DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng))
        };
        let inner_rot = gauss(D_Z, D_Z).qr().q();
        let b1 = gauss(D_Z, 1).column(0) * 0.1;
        let outer = gauss(D_X, D_Z).qr().q();
        let scales = DVector::from_fn(D_Z, |i, _| 3.0 - 0.2 * i as f64);
        let a = outer * DMatrix::from_diagonal(&scales);
        let c = gauss(D_X, 1).column(0) * 0.5;
        GeneratorSpec::Mlp(Mlp {
            layers: vec![
                DenseLayer {
                    weights: inner_rot * 1.2,
                    bias: b1.into_owned(),
                    activation: Activation::Tanh,
                },
                DenseLayer {
                    weights: a,
                    bias: c.into_owned(),
                    activation: Activation::Identity,
                },
            ],
        })
    }

    pub fn toy_gan() -> Self {
        WeightFile::from_json_str(TOY_GAN_JSON)
            .expect("bundled toy GAN weight file is valid")
            .generator
    }

    /// Looks up a bundled generator by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "radial-warp" | "radial_warp" => Some(GeneratorSpec::RadialWarp(RadialWarp::default())),
            "identity" => Some(GeneratorSpec::identity(2)),
            "lambertian" => Some(GeneratorSpec::lambertian(0)),
            "toy-gan" | "toy_gan" => Some(GeneratorSpec::toy_gan()),
            _ => None,
        }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, WeightFileError> {
        WeightFile::load(path).map(|w| w.generator)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Mlp(_) => "mlp",
            GeneratorSpec::Linear(_) => "linear",
            GeneratorSpec::RadialWarp(_) => "radial_warp",
        }
    }

    fn check_dim(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() == self.d_z() {
            Ok(())
        } else {
            Err(GeodesicError::DimensionMismatch {
                expected: self.d_z(),
                actual: z.len(),
                context: "latent point",
            })
        }
    }
}

impl Generator for GeneratorSpec {
    fn d_z(&self) -> usize {
        match self {
            GeneratorSpec::Mlp(m) => m.layers[0].d_in(),
            GeneratorSpec::Linear(l) => l.matrix.ncols(),
            GeneratorSpec::RadialWarp(_) => 2,
        }
    }

    fn d_x(&self) -> usize {
        match self {
            GeneratorSpec::Mlp(m) => m.layers[m.layers.len() - 1].d_out(),
            GeneratorSpec::Linear(l) => l.matrix.nrows(),
            GeneratorSpec::RadialWarp(_) => 2,
        }
    }

    fn forward(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(z)?;
        Ok(match self {
            GeneratorSpec::Mlp(m) => m.forward(z),
            GeneratorSpec::Linear(l) => &l.matrix * z + &l.offset,
            GeneratorSpec::RadialWarp(w) => w.forward(z),
        })
    }

    fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(z)?;
        Ok(match self {
            GeneratorSpec::Mlp(m) => m.jacobian(z),
            GeneratorSpec::Linear(l) => l.matrix.clone(),
            GeneratorSpec::RadialWarp(w) => w.jacobian(z),
        })
    }
}
