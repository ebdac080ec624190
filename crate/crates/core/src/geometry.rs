//! Pullback geometry of a generator `f: Z -> X` with the Euclidean metric on `X`.
//!
//! The metric on latent space is `g = JᵀJ`. Linear solves and determinants go
//! through a Cholesky factorization of `g + ridge·I`; nothing here forms an
//! explicit inverse except the Christoffel oracle, which is test machinery.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{GeodesicError, Result};
use crate::generators::Generator;

/// Coordinates of a point (or tangent vector) in latent space.
pub type LatentPoint = DVector<f64>;
/// Coordinates of a point (or vector) in data space.
pub type AmbientPoint = DVector<f64>;
/// `d_x × d_z` matrix with `J[(k, m)] = ∂f^k/∂z^m`.
pub type JacobianMatrix = DMatrix<f64>;

/// Relative pivot floor below which a ridged metric counts as singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// Pullback metric `g = JᵀJ` at a latent point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor(DMatrix<f64>);

impl MetricTensor {
    /// Wraps a matrix, symmetrizing away round-off.
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "metric must be square");
        let sym = (&m + m.transpose()) * 0.5;
        MetricTensor(sym)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Absolute ridge `rel · trace(g) / d_z` used to regularize solves.
    pub fn scaled_ridge(&self, rel: f64) -> f64 {
        rel * self.trace() / self.dim() as f64
    }

    fn ridged_cholesky(&self, ridge: f64) -> Result<Cholesky<f64, Dyn>> {
        let n = self.dim();
        let m = &self.0 + DMatrix::identity(n, n) * ridge;
        let scale = m.diagonal().iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        let chol = Cholesky::new(m).ok_or_else(|| {
            GeodesicError::SingularMetric(format!(
                "g + {ridge:e}·I is not positive definite; raise the ridge"
            ))
        })?;
        let l = chol.l_dirty();
        let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if !(min_pivot > PIVOT_FLOOR * scale) {
            return Err(GeodesicError::SingularMetric(format!(
                "smallest pivot {min_pivot:e} is below {PIVOT_FLOOR:e}·{scale:e}"
            )));
        }
        Ok(chol)
    }
}

/// Christoffel symbols of the second kind, `gamma[k][m][n] = Γ^k_mn`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelSymbols {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelSymbols {
    fn zeros(dim: usize) -> Self {
        ChristoffelSymbols {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, m: usize, n: usize) -> f64 {
        self.data[(k * self.dim + m) * self.dim + n]
    }

    fn set(&mut self, k: usize, m: usize, n: usize, v: f64) {
        self.data[(k * self.dim + m) * self.dim + n] = v;
    }

    /// Contraction `Γ(u, w)^k = Σ_mn Γ^k_mn u^m w^n`.
    pub fn contract(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |k, _| {
            let mut acc = 0.0;
            for m in 0..d {
                for n in 0..d {
                    acc += self.get(k, m, n) * u[m] * w[n];
                }
            }
            acc
        })
    }

    /// Largest `|Γ^k_mn - Γ^k_nm|`.
    pub fn max_asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for k in 0..d {
            for m in 0..d {
                for n in 0..d {
                    worst = worst.max((self.get(k, m, n) - self.get(k, n, m)).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Central-difference step `1e-4 · (1 + ‖z‖∞)`.
pub fn default_fd_step(z: &DVector<f64>) -> f64 {
    1e-4 * (1.0 + z.amax())
}

/// `g = JᵀJ`.
pub fn pullback_metric(j: &JacobianMatrix) -> MetricTensor {
    MetricTensor::from_matrix(j.tr_mul(j))
}

/// `log det(g + ridge·I)` through a Cholesky factor.
pub fn metric_log_det(g: &MetricTensor, ridge: f64) -> Result<f64> {
    let chol = g.ridged_cholesky(ridge)?;
    let l = chol.l_dirty();
    Ok((0..g.dim()).map(|i| 2.0 * l[(i, i)].ln()).sum())
}

/// Solves `(JᵀJ + ridge·I) b = Jᵀa`, i.e. the least-squares pullback of an
/// ambient vector onto the tangent coordinates.
pub fn pullback_vector(j: &JacobianMatrix, a: &DVector<f64>, ridge: f64) -> Result<LatentPoint> {
    if a.len() != j.nrows() {
        return Err(GeodesicError::DimensionMismatch {
            expected: j.nrows(),
            actual: a.len(),
            context: "ambient vector for pullback",
        });
    }
    let g = pullback_metric(j);
    let chol = g.ridged_cholesky(ridge)?;
    Ok(chol.solve(&j.tr_mul(a)))
}

/// Central-difference Jacobian of `f` at `z` with step `h`.
pub fn jacobian_fd<G: Generator + ?Sized>(f: &G, z: &DVector<f64>, h: f64) -> Result<JacobianMatrix> {
    let dz = f.d_z();
    let mut jac = DMatrix::zeros(f.d_x(), dz);
    let mut zp = z.clone();
    for m in 0..dz {
        zp[m] = z[m] + h;
        let fp = f.forward(&zp)?;
        zp[m] = z[m] - h;
        let fm = f.forward(&zp)?;
        zp[m] = z[m];
        jac.set_column(m, &((fp - fm) / (2.0 * h)));
    }
    Ok(jac)
}

/// Second directional difference `(f(z+hv) - 2f(z) + f(z-hv)) / h²`.
pub fn second_directional_difference<G: Generator + ?Sized>(
    f: &G,
    z: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<AmbientPoint> {
    let fp = f.forward(&(z + v * h))?;
    let f0 = f.forward(z)?;
    let fm = f.forward(&(z - v * h))?;
    Ok((fp - f0 * 2.0 + fm) / (h * h))
}

/// Christoffel symbols by central differences of the analytic metric.
///
/// Oracle only: the solver works in ambient coordinates where they vanish.
pub fn christoffel_fd<G: Generator + ?Sized>(f: &G, z: &DVector<f64>, h: f64) -> Result<ChristoffelSymbols> {
    if !(h > 0.0) {
        return Err(GeodesicError::InvalidConfig(format!("fd step must be positive, got {h}")));
    }
    let d = f.d_z();
    if z.len() != d {
        return Err(GeodesicError::DimensionMismatch {
            expected: d,
            actual: z.len(),
            context: "latent point",
        });
    }
    let g0 = pullback_metric(&f.jacobian(z)?);
    let chol = g0.ridged_cholesky(0.0)?;

    // dg[l] = ∂g/∂z^l
    let mut dg = Vec::with_capacity(d);
    let mut zp = z.clone();
    for l in 0..d {
        zp[l] = z[l] + h;
        let gp = pullback_metric(&f.jacobian(&zp)?).into_matrix();
        zp[l] = z[l] - h;
        let gm = pullback_metric(&f.jacobian(&zp)?).into_matrix();
        zp[l] = z[l];
        dg.push((gp - gm) / (2.0 * h));
    }

    let mut out = ChristoffelSymbols::zeros(d);
    for m in 0..d {
        for n in 0..d {
            // first-kind symbols Γ_l,mn = ½(∂_m g_ln + ∂_n g_lm − ∂_l g_mn)
            let first = DVector::from_fn(d, |l, _| {
                0.5 * (dg[m][(l, n)] + dg[n][(l, m)] - dg[l][(m, n)])
            });
            let second = chol.solve(&first);
            for k in 0..d {
                out.set(k, m, n, second[k]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{GeneratorSpec, RadialWarp};
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn identity_jacobian_gives_identity_metric() {
        let g = pullback_metric(&DMatrix::identity(2, 2));
        assert_eq!(g.as_matrix(), &DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn diagonal_tall_jacobian() {
        let j = dmatrix![2.0, 0.0; 0.0, 3.0; 0.0, 0.0];
        let g = pullback_metric(&j);
        assert_eq!(g.as_matrix(), &dmatrix![4.0, 0.0; 0.0, 9.0]);
    }

    #[test]
    fn log_det_closed_forms() {
        let id = MetricTensor::from_matrix(DMatrix::identity(2, 2));
        assert_eq!(metric_log_det(&id, 0.0).unwrap(), 0.0);
        let g = MetricTensor::from_matrix(dmatrix![4.0, 0.0; 0.0, 9.0]);
        assert_relative_eq!(metric_log_det(&g, 0.0).unwrap(), 36.0_f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn log_det_rejects_rank_deficient_without_ridge() {
        let g = pullback_metric(&dmatrix![1.0, 2.0; 2.0, 4.0]);
        assert!(matches!(metric_log_det(&g, 0.0), Err(GeodesicError::SingularMetric(_))));
        // a real ridge makes it solvable
        assert!(metric_log_det(&g, 1e-3).is_ok());
    }

    #[test]
    fn pullback_vector_closed_forms() {
        let b = pullback_vector(&DMatrix::identity(2, 2), &dvector![1.0, 2.0], 0.0).unwrap();
        assert_relative_eq!(b, dvector![1.0, 2.0], epsilon = 1e-15);

        let j = dmatrix![2.0, 0.0; 0.0, 3.0; 0.0, 0.0];
        let b = pullback_vector(&j, &dvector![4.0, 9.0, 5.0], 0.0).unwrap();
        assert_relative_eq!(b, dvector![2.0, 3.0], epsilon = 1e-14);
    }

    #[test]
    fn pullback_vector_dimension_check() {
        let j = DMatrix::identity(3, 2);
        assert!(matches!(
            pullback_vector(&j, &dvector![1.0, 2.0], 0.0),
            Err(GeodesicError::DimensionMismatch { expected: 3, actual: 2, .. })
        ));
    }

    #[test]
    fn pullback_vector_singular() {
        let j = dmatrix![1.0, 1.0; 1.0, 1.0; 0.0, 0.0];
        assert!(matches!(
            pullback_vector(&j, &dvector![1.0, 0.0, 0.0], 0.0),
            Err(GeodesicError::SingularMetric(_))
        ));
    }

    #[test]
    fn christoffel_vanishes_for_linear_map() {
        let f = GeneratorSpec::linear(dmatrix![1.0, 2.0; -0.5, 1.0; 3.0, 0.2], dvector![0.1, 0.0, -1.0]).unwrap();
        let gamma = christoffel_fd(&f, &dvector![0.3, -0.7], 1e-4).unwrap();
        assert!(gamma.max_abs() < 1e-6, "max |Γ| = {}", gamma.max_abs());
    }

    #[test]
    fn christoffel_rejects_bad_step() {
        let f = GeneratorSpec::RadialWarp(RadialWarp::default());
        assert!(christoffel_fd(&f, &dvector![1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn radial_warp_metric_matches_fd_at_unit_point() {
        let f = GeneratorSpec::RadialWarp(RadialWarp::default());
        let z = dvector![1.0, 0.0];
        let g = pullback_metric(&f.jacobian(&z).unwrap());
        let g_fd = pullback_metric(&jacobian_fd(&f, &z, default_fd_step(&z)).unwrap());
        let rel = (g.as_matrix() - g_fd.as_matrix()).amax() / g.as_matrix().amax();
        assert!(rel < 1e-5, "relative metric error {rel}");
    }

    #[test]
    fn christoffel_matches_second_difference_pullback_at_unit_point() {
        let f = GeneratorSpec::RadialWarp(RadialWarp::default());
        let z = dvector![1.0, 0.0];
        let v = dvector![0.3, 0.8];
        let gamma = christoffel_fd(&f, &z, 1e-4).unwrap();
        let h = second_directional_difference(&f, &z, &v, 1e-4).unwrap();
        let expect = pullback_vector(&f.jacobian(&z).unwrap(), &h, 0.0).unwrap();
        let got = gamma.contract(&v, &v);
        assert!((&got - &expect).amax() < 1e-3 * (1.0 + expect.amax()));
    }
}
