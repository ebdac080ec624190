//! Independent finite-difference oracles shared by the integration tests.
#![allow(dead_code)]

use latent_geodesic::generators::{Generator, GeneratorSpec, RadialWarp};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn radial_warp() -> GeneratorSpec {
    GeneratorSpec::RadialWarp(RadialWarp::default())
}

/// Every bundled generator with a display name.
pub fn bundled() -> Vec<(&'static str, GeneratorSpec)> {
    let mut r = rng(99);
    let a = gaussian_matrix(&mut r, 5, 3);
    let b = gaussian(&mut r, 5);
    vec![
        ("radial_warp", radial_warp()),
        ("identity", GeneratorSpec::identity(2)),
        ("linear", GeneratorSpec::linear(a, b).unwrap()),
        ("lambertian", GeneratorSpec::lambertian(0)),
        ("toy_gan", GeneratorSpec::toy_gan()),
    ]
}

/// Central differences of `f`, one column per latent coordinate.
pub fn fd_jacobian(f: &dyn Generator, z: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(f.d_x(), f.d_z());
    for m in 0..f.d_z() {
        let mut e = DVector::zeros(f.d_z());
        e[m] = h;
        let col = (f.forward(&(z + &e)).unwrap() - f.forward(&(z - &e)).unwrap()) / (2.0 * h);
        out.set_column(m, &col);
    }
    out
}

/// `d²/dt² f(z + t v)` at `t = 0` by a fourth-order stencil.
pub fn fd_second_directional(f: &dyn Generator, z: &DVector<f64>, v: &DVector<f64>, h: f64) -> DVector<f64> {
    let at = |t: f64| f.forward(&(z + v * t)).unwrap();
    (at(-2.0 * h) * -1.0 + at(-h) * 16.0 - at(0.0) * 30.0 + at(h) * 16.0 - at(2.0 * h)) / (12.0 * h * h)
}

/// `max |a - b| / max(1, max |b|)`
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(1.0);
    (a - b).amax() / scale
}

/// Determinant by cofactor expansion, for small matrices.
pub fn cofactor_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 1 {
        return m[(0, 0)];
    }
    (0..n)
        .map(|j| {
            let minor = m.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[(0, j)] * cofactor_det(&minor)
        })
        .sum()
}

/// `ρ` written out from scratch: `½‖z‖² + (d/2) log 2π + ½ log det(JᵀJ)`.
pub fn rho_oracle(f: &dyn Generator, z: &DVector<f64>) -> f64 {
    let j = f.jacobian(z).unwrap();
    let g = j.transpose() * &j;
    let d = z.len() as f64;
    0.5 * z.norm_squared() + 0.5 * d * (2.0 * std::f64::consts::PI).ln() + 0.5 * cofactor_det(&g).ln()
}
