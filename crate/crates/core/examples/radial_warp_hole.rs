//! Compares StraightZ, Geod and GeodReg across the density hole of the
//! analytic radial-warp generator, with the grid-graph oracle as reference.

use latent_geodesic::eval::{compare, OracleConfig};
use latent_geodesic::generators::{GeneratorSpec, RadialWarp};
use latent_geodesic::{LatentPrior, SolverConfig};
use nalgebra::dvector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = GeneratorSpec::RadialWarp(RadialWarp::default());
    let prior = LatentPrior::standard_normal(2);
    let (za, zb) = (dvector![-1.2, 0.0], dvector![1.2, 0.0]);
    let mu: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let cfg = SolverConfig { mu, ..SolverConfig::default() };
    let oracle = OracleConfig::square(2, 1.5, 128);

    let t = std::time::Instant::now();
    let cmp = compare(&f, &prior, &za, &zb, &cfg, Some(&oracle))?;
    println!("{:<10} {:>10} {:>10} {:>16} {:>10} {:>6}", "method", "length", "energy", "min log-density", "gap", "iters");
    for r in &cmp.reports {
        println!(
            "{:<10} {:>10.5} {:>10.4} {:>16.5} {:>10.4} {:>6}",
            r.method,
            r.ambient_length,
            r.energy,
            r.min_log_density,
            r.oracle_length_gap.unwrap_or(f64::NAN),
            r.iterations.map_or("-".to_string(), |i| i.to_string()),
        );
    }
    if let Some(o) = &cmp.oracle {
        println!("{:<10} {:>10.5} {:>10} {:>16.5}", "oracle", o.length, "", o.min_log_density);
    }
    println!("elapsed {:.2?}", t.elapsed());
    Ok(())
}
