//! The three interpolation methods on the bundled 2-20-20-2 toy GAN, which
//! was trained on a ring and therefore has a low-density hole at the origin.
//!
//! The GAN folds the latent plane in several places, where `det g` vanishes
//! and `log det g` has a pole. A relative ridge of 1e-2 damps those poles so
//! the density penalty does not chase them.
//!
//! Usage: `cargo run --release --example toy_gan_compare [mu]`

use latent_geodesic::eval::compare;
use latent_geodesic::generators::{Generator, GeneratorSpec};
use latent_geodesic::{LatentPrior, SolverConfig};
use nalgebra::dvector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = GeneratorSpec::toy_gan();
    let prior = LatentPrior::standard_normal(2);
    let mu: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let cfg = SolverConfig {
        mu,
        ridge: 1e-2,
        ..SolverConfig::default()
    };

    let pairs = [
        (dvector![-1.0, 0.0], dvector![1.0, 0.0]),
        (dvector![0.0, -1.0], dvector![0.0, 1.0]),
        (dvector![-0.8, -0.6], dvector![0.9, 0.5]),
    ];
    for (za, zb) in &pairs {
        let (xa, xb) = (f.forward(za)?, f.forward(zb)?);
        println!(
            "z {:?} -> {:?}   x ({:.3}, {:.3}) -> ({:.3}, {:.3})",
            za.as_slice(),
            zb.as_slice(),
            xa[0],
            xa[1],
            xb[0],
            xb[1]
        );
        let cmp = compare(&f, &prior, za, zb, &cfg, None)?;
        for r in &cmp.reports {
            println!(
                "  {:<10} length {:>7.4}  min log-density {:>8.3}",
                r.method, r.ambient_length, r.min_log_density
            );
        }
    }
    Ok(())
}
