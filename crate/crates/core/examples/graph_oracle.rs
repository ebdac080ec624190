//! Brute-force shortest paths on a latent grid, as an independent check of
//! the relaxation solver. Shows how the graph length settles as the grid is
//! refined and how the density penalty reroutes the path.

use latent_geodesic::eval::{curve_length, graph_geodesic_oracle, OracleConfig};
use latent_geodesic::generators::{GeneratorSpec, RadialWarp};
use latent_geodesic::solver::interpolate;
use latent_geodesic::{LatentPrior, Method, SolverConfig};
use nalgebra::dvector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = GeneratorSpec::RadialWarp(RadialWarp::default());
    let prior = LatentPrior::standard_normal(2);
    let (za, zb) = (dvector![-1.2, 0.0], dvector![1.2, 0.0]);

    let geod = interpolate(Method::Geod, &f, &prior, &za, &zb, &SolverConfig::default())?;
    println!("solver geodesic length {:.5}", curve_length(&f, &geod)?);

    for res in [32, 64, 128, 256] {
        let t = std::time::Instant::now();
        let path = graph_geodesic_oracle(&f, &prior, &za, &zb, &OracleConfig::square(2, 1.5, res))?;
        println!(
            "grid {res:>3}x{res:<3} length {:.5}  nodes on path {:>4}  {:.2?}",
            path.length,
            path.points.len(),
            t.elapsed()
        );
    }

    for mu in [0.0, 0.1, 1.0] {
        let oc = OracleConfig::square(2, 1.5, 96).with_mu(mu);
        let path = graph_geodesic_oracle(&f, &prior, &za, &zb, &oc)?;
        let deepest = path
            .points
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(f64::INFINITY, f64::min);
        println!(
            "mu {mu:<4} length {:.4}  min log-density {:>7.3}  closest approach to origin {:.3}",
            path.length, path.min_log_density, deepest
        );
    }
    Ok(())
}
