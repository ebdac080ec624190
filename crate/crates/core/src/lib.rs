//! Geodesic interpolation on the manifold of a smooth generator, with a
//! density penalty that keeps paths out of low-likelihood holes.
//!
//! The latent space `Z` carries the pullback metric `g = JᵀJ` of a generator
//! `f: Z -> X`. Curves are discretized into `K` latent points with pinned
//! endpoints and relaxed by straightening them in `X`, pulling the update
//! back through the Jacobian, and adding the gradient of
//! `ρ(z) = -log p(z) + ½ log det g(z)` weighted by `μ`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod eval;
pub mod generators;
pub mod geometry;
pub mod cli;
pub mod solver;

pub use density::LatentPrior;
pub use error::{GeodesicError, Result, WeightFileError};
pub use eval::{InterpolationReport, OracleConfig};
pub use generators::{Generator, GeneratorSpec, WeightFile};
pub use solver::{DiscreteCurve, Method, SolveTrace, SolverConfig};
