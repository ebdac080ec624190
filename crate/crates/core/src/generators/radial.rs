use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

/// Analytic annulus-pushing map on `R²`.
///
/// ```text
/// f(z) = R(τ‖z‖²) · (1 + r0 · tanh(s‖z‖) / ‖z‖) · z
/// ```
///
/// `R(θ)` is the planar rotation. Radially, `‖f(z)‖ = ‖z‖ + r0·tanh(s‖z‖)`,
/// so a disc of radius about `1/s` is blown up to radius about `r0`: the
/// metric determinant there is `(1 + r0·s)²`, which is the density hole.
/// The twist `τ` bends straight latent lines into spirals so that a straight
/// line in `Z` is not already the ambient geodesic. The map is odd and
/// smooth (`tanh(s r)/r` is even and analytic in `r`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWarp {
    pub inner_radius: f64,
    pub sharpness: f64,
    #[serde(default)]
    pub twist: f64,
}

impl Default for RadialWarp {
    fn default() -> Self {
        RadialWarp {
            inner_radius: 1.0,
            sharpness: 6.0,
            twist: 0.6,
        }
    }
}

impl RadialWarp {
    /// `c(r) = 1 + r0 · tanh(s r) / r`
    fn scale(&self, r: f64) -> f64 {
        let u = self.sharpness * r;
        let tanh_over_u = if u < 1e-8 { 1.0 } else { u.tanh() / u };
        1.0 + self.inner_radius * self.sharpness * tanh_over_u
    }

    /// `c'(r) / r`, with a series near the origin where the direct form cancels.
    fn scale_slope_over_r(&self, r: f64) -> f64 {
        let (r0, s) = (self.inner_radius, self.sharpness);
        let u = s * r;
        if u < 1e-2 {
            let u2 = u * u;
            r0 * s.powi(3) * (-2.0 / 3.0 + 8.0 * u2 / 15.0 - 34.0 * u2 * u2 / 105.0)
        } else {
            let sech2 = 1.0 / u.cosh().powi(2);
            r0 * (u * sech2 - u.tanh()) / r.powi(3)
        }
    }

    fn rotation(&self, r2: f64) -> Matrix2<f64> {
        let theta = self.twist * r2;
        let (sin, cos) = theta.sin_cos();
        Matrix2::new(cos, -sin, sin, cos)
    }

    pub(crate) fn forward(&self, z: &DVector<f64>) -> DVector<f64> {
        let zv = Vector2::new(z[0], z[1]);
        let r2 = zv.norm_squared();
        let x = self.rotation(r2) * zv * self.scale(r2.sqrt());
        DVector::from_column_slice(x.as_slice())
    }

    pub(crate) fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let zv = Vector2::new(z[0], z[1]);
        let r2 = zv.norm_squared();
        let r = r2.sqrt();
        let c = self.scale(r);
        let q = self.scale_slope_over_r(r);
        let zzt = zv * zv.transpose();
        let quarter_turn = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let inner = Matrix2::identity() * c + zzt * q + quarter_turn * zzt * (2.0 * self.twist * c);
        let jac = self.rotation(r2) * inner;
        DMatrix::from_column_slice(2, 2, jac.as_slice())
    }

    /// `(1 + r0·s)²`, the metric determinant at the origin.
    pub fn origin_metric_det(&self) -> f64 {
        (1.0 + self.inner_radius * self.sharpness).powi(2)
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if !(self.inner_radius.is_finite() && self.inner_radius > 0.0) {
            return Err(format!("inner_radius must be positive, got {}", self.inner_radius));
        }
        if !(self.sharpness.is_finite() && self.sharpness > 0.0) {
            return Err(format!("sharpness must be positive, got {}", self.sharpness));
        }
        if !self.twist.is_finite() {
            return Err("twist must be finite".into());
        }
        Ok(())
    }
}
