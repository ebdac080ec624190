//! Straightness test on a nonlinearly parametrized 9-D linear manifold in
//! `R^64`. The true geodesic between two image points is the ambient chord,
//! so the cosine dissimilarity of each path segment to that chord measures
//! how far a method strays from the ground truth.
//!
//! Usage: `cargo run --release --example lambertian_cosine [pairs] [mu]`

use latent_geodesic::eval::compare;
use latent_geodesic::generators::GeneratorSpec;
use latent_geodesic::{LatentPrior, Method, SolverConfig};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let pairs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let mu: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.005);

    let f = GeneratorSpec::lambertian(0);
    let prior = LatentPrior::standard_normal(9);
    let cfg = SolverConfig {
        mu,
        ..SolverConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let methods = [Method::Geod, Method::GeodReg, Method::StraightZ];
    let mut totals = [0.0; 3];

    println!("{:>4} {:>10} {:>10} {:>10}", "pair", "geod", "geod_reg", "straight_z");
    for i in 0..pairs {
        let za = DVector::from_fn(9, |_, _| StandardNormal.sample(&mut rng));
        let zb = DVector::from_fn(9, |_, _| StandardNormal.sample(&mut rng));
        let cmp = compare(&f, &prior, &za, &zb, &cfg, None)?;
        let row: Vec<f64> = methods
            .iter()
            .map(|&m| cmp.report(m).and_then(|r| r.mean_cosine_dissimilarity()).unwrap_or(f64::NAN))
            .collect();
        for (t, v) in totals.iter_mut().zip(&row) {
            *t += v / pairs as f64;
        }
        println!("{:>4} {:>10.5} {:>10.5} {:>10.5}", i, row[0], row[1], row[2]);
    }
    println!("{:>4} {:>10.5} {:>10.5} {:>10.5}", "mean", totals[0], totals[1], totals[2]);
    Ok(())
}
