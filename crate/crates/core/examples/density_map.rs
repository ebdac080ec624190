//! Text heat map of the density penalty `ρ(z) = -log p(z) + ½ log det g(z)`
//! over `[-2, 2]²`. Dense characters mark low density (high `ρ`).
//!
//! Usage: `cargo run --example density_map [radial-warp|toy-gan]`

use latent_geodesic::density::regularizer;
use latent_geodesic::generators::GeneratorSpec;
use latent_geodesic::geometry::pullback_metric;
use latent_geodesic::{Generator, LatentPrior};
use nalgebra::dvector;

const SHADES: &[u8] = b" .:-=+*#%@";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "radial-warp".into());
    let f = GeneratorSpec::builtin(&name).ok_or(format!("unknown generator {name}"))?;
    if f.d_z() != 2 {
        return Err("the map needs a 2-D latent space".into());
    }
    let prior = LatentPrior::standard_normal(2);
    let (cols, rows) = (64, 32);
    let mut grid = vec![vec![f64::NAN; cols]; rows];
    for (r, row) in grid.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let z = dvector![
                -2.0 + 4.0 * (c as f64 + 0.5) / cols as f64,
                2.0 - 4.0 * (r as f64 + 0.5) / rows as f64
            ];
            let ridge = pullback_metric(&f.jacobian(&z)?).scaled_ridge(1e-2);
            *cell = regularizer(&f, &prior, &z, ridge).unwrap_or(f64::NAN);
        }
    }
    let finite = grid.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    for row in &grid {
        let line: String = row
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    '?'
                } else {
                    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                    SHADES[(t * (SHADES.len() - 1) as f64).round() as usize] as char
                }
            })
            .collect();
        println!("{line}");
    }
    println!("{name}: ρ from {lo:.2} (blank) to {hi:.2} (@)");
    Ok(())
}
