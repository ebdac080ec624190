//! Latent prior and the density penalty `ρ(z) = -log p(z) + ½ log det g(z)`.
//!
//! `ρ` is the negative log-density of `x = f(z)` under the pushforward of the
//! prior (change of variables on the image manifold). Large `ρ` marks latent
//! regions that the generator stretches over sparse data.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{GeodesicError, Result};
use crate::generators::Generator;
use crate::geometry::{metric_log_det, pullback_metric};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    StandardNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentPrior {
    pub kind: PriorKind,
    pub dim: usize,
}

impl LatentPrior {
    pub fn standard_normal(dim: usize) -> Self {
        LatentPrior {
            kind: PriorKind::StandardNormal,
            dim,
        }
    }

    /// `log N(z; 0, I) = -½‖z‖² - (d/2) log 2π`
    pub fn log_prob(&self, z: &DVector<f64>) -> Result<f64> {
        if z.len() != self.dim {
            return Err(GeodesicError::DimensionMismatch {
                expected: self.dim,
                actual: z.len(),
                context: "latent point for prior",
            });
        }
        match self.kind {
            PriorKind::StandardNormal => {
                Ok(-0.5 * z.norm_squared() - 0.5 * self.dim as f64 * (2.0 * PI).ln())
            }
        }
    }

    /// `∇ log p(z)`, exact.
    pub fn grad_log_prob(&self, z: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            PriorKind::StandardNormal => -z,
        }
    }
}

pub fn log_prior(prior: &LatentPrior, z: &DVector<f64>) -> Result<f64> {
    prior.log_prob(z)
}

/// `½ log det(JᵀJ + ridge·I)` at `z`.
pub fn half_log_det_metric<G: Generator + ?Sized>(f: &G, z: &DVector<f64>, ridge: f64) -> Result<f64> {
    let g = pullback_metric(&f.jacobian(z)?);
    Ok(0.5 * metric_log_det(&g, ridge)?)
}

/// `ρ(z) = -log p(z) + ½ log det(g(z) + ridge·I)`
pub fn regularizer<G: Generator + ?Sized>(f: &G, prior: &LatentPrior, z: &DVector<f64>, ridge: f64) -> Result<f64> {
    Ok(-prior.log_prob(z)? + half_log_det_metric(f, z, ridge)?)
}

/// Central-difference gradient of [`regularizer`] with step `h` per coordinate.
pub fn regularizer_grad<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    z: &DVector<f64>,
    ridge: f64,
    h: f64,
) -> Result<DVector<f64>> {
    if !(h > 0.0) {
        return Err(GeodesicError::InvalidConfig(format!("fd step must be positive, got {h}")));
    }
    let mut grad = DVector::zeros(z.len());
    let mut zp = z.clone();
    for i in 0..z.len() {
        zp[i] = z[i] + h;
        let up = regularizer(f, prior, &zp, ridge)?;
        zp[i] = z[i] - h;
        let down = regularizer(f, prior, &zp, ridge)?;
        zp[i] = z[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSpec, RadialWarp};
    use crate::geometry::default_fd_step;
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix};

    const LOG_2PI: f64 = 1.8378770664093453;

    #[test]
    fn log_prior_closed_forms() {
        let p = LatentPrior::standard_normal(2);
        assert_relative_eq!(log_prior(&p, &dvector![0.0, 0.0]).unwrap(), -LOG_2PI, epsilon = 1e-15);
        assert_relative_eq!(log_prior(&p, &dvector![1.0, 1.0]).unwrap(), -1.0 - LOG_2PI, epsilon = 1e-15);
        assert!(log_prior(&p, &dvector![1.0]).is_err());
    }

    #[test]
    fn prior_integrates_to_one() {
        // midpoint rule on [-8, 8]², oracle independent of the closed form normalizer
        let p = LatentPrior::standard_normal(2);
        let n = 400;
        let step = 16.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let z = dvector![-8.0 + (i as f64 + 0.5) * step, -8.0 + (j as f64 + 0.5) * step];
                total += p.log_prob(&z).unwrap().exp() * step * step;
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "integral {total}");
    }

    #[test]
    fn regularizer_closed_forms() {
        let p = LatentPrior::standard_normal(2);
        let id = GeneratorSpec::identity(2);
        assert_relative_eq!(regularizer(&id, &p, &dvector![0.0, 0.0], 0.0).unwrap(), LOG_2PI, epsilon = 1e-14);
        let twice = GeneratorSpec::linear(DMatrix::identity(2, 2) * 2.0, DVector::zeros(2)).unwrap();
        assert_relative_eq!(
            regularizer(&twice, &p, &dvector![0.0, 0.0], 0.0).unwrap(),
            LOG_2PI + 0.5 * 16.0_f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn radial_warp_has_a_hole_at_the_origin() {
        let p = LatentPrior::standard_normal(2);
        let f = GeneratorSpec::RadialWarp(RadialWarp::default());
        let center = regularizer(&f, &p, &dvector![1e-3, 0.0], 0.0).unwrap();
        let outside = regularizer(&f, &p, &dvector![1.5, 0.0], 0.0).unwrap();
        assert!(center > outside, "ρ(center) = {center}, ρ(1.5) = {outside}");
    }

    #[test]
    fn regularizer_grad_identity_and_linear() {
        let p = LatentPrior::standard_normal(2);
        let id = GeneratorSpec::identity(2);
        let z = dvector![1.0, 0.0];
        let g = regularizer_grad(&id, &p, &z, 0.0, default_fd_step(&z)).unwrap();
        assert_relative_eq!(g, dvector![1.0, 0.0], epsilon = 1e-8);

        let lin = GeneratorSpec::linear(
            nalgebra::dmatrix![1.0, 0.5; -0.3, 2.0; 0.7, 0.1],
            dvector![1.0, 2.0, 3.0],
        )
        .unwrap();
        let z = dvector![-0.4, 1.3];
        let g = regularizer_grad(&lin, &p, &z, 0.0, default_fd_step(&z)).unwrap();
        assert_relative_eq!(g, z, epsilon = 1e-7);
    }

    #[test]
    fn regularizer_grad_rejects_bad_step() {
        let p = LatentPrior::standard_normal(2);
        let id = GeneratorSpec::identity(2);
        assert!(regularizer_grad(&id, &p, &dvector![0.0, 0.0], 0.0, -1.0).is_err());
    }
}
