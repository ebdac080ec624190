//! Checks the latent-space geodesic machinery against the ambient picture:
//! the Christoffel contraction `Γ(v, v)` built from metric derivatives must
//! equal the pullback of the second directional derivative of `f`.

use latent_geodesic::generators::{Generator, GeneratorSpec, RadialWarp};
use latent_geodesic::geometry::{christoffel_fd, pullback_metric, pullback_vector, second_directional_difference};
use nalgebra::dvector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let generators = [
        ("radial_warp", GeneratorSpec::RadialWarp(RadialWarp::default())),
        ("toy_gan", GeneratorSpec::toy_gan()),
    ];
    let probes = [
        (dvector![0.3, -0.4], dvector![1.0, 0.0]),
        (dvector![-1.1, 0.2], dvector![0.6, 0.8]),
        (dvector![0.9, 0.9], dvector![-0.8, 0.6]),
    ];
    for (name, f) in &generators {
        println!("{name}");
        for (z, v) in &probes {
            let j = f.jacobian(z)?;
            let gamma = christoffel_fd(f, z, 1e-5)?;
            let lhs = gamma.contract(v, v);
            let rhs = pullback_vector(&j, &second_directional_difference(f, z, v, 1e-4)?, 0.0)?;
            println!(
                "  z ({:>5.2}, {:>5.2})  det g {:>10.4}  Γ(v,v) ({:>9.4}, {:>9.4})  J⁺H(v,v) ({:>9.4}, {:>9.4})  asym {:.1e}",
                z[0],
                z[1],
                pullback_metric(&j).as_matrix().determinant(),
                lhs[0],
                lhs[1],
                rhs[0],
                rhs[1],
                gamma.max_asymmetry()
            );
        }
    }
    Ok(())
}
