//! Loading, inspecting and writing generator weight files.
//!
//! Usage: `cargo run --example weight_file [path]` (defaults to the bundled
//! toy GAN).

use latent_geodesic::cli::jacobian_discrepancy;
use latent_geodesic::generators::{Activation, DenseLayer, Generator, GeneratorSpec};
use latent_geodesic::WeightFile;
use nalgebra::{DMatrix, DVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wf = match std::env::args().nth(1) {
        Some(path) => WeightFile::load(path)?,
        None => WeightFile::from_json_str(latent_geodesic::generators::TOY_GAN_JSON)?,
    };
    let f = &wf.generator;
    println!("kind {}  d_z {}  d_x {}", f.kind(), f.d_z(), f.d_x());
    if let GeneratorSpec::Mlp(m) = f {
        for (i, layer) in m.layers().iter().enumerate() {
            println!("  layer {i}: {} -> {} {}", layer.d_in(), layer.d_out(), layer.activation.name());
        }
    }
    for (k, v) in &wf.metadata {
        println!("  {k} = {v}");
    }
    let z = DVector::from_element(f.d_z(), 0.3);
    println!("f(0.3, ..) = {:?}", f.forward(&z)?.as_slice());
    println!("jacobian vs central differences: {:.2e}", jacobian_discrepancy(f, &z)?);

    // build a small generator by hand and write it out
    let custom = GeneratorSpec::mlp(vec![
        DenseLayer {
            weights: DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.5, -0.5]),
            bias: DVector::zeros(3),
            activation: Activation::Tanh,
        },
        DenseLayer {
            weights: DMatrix::identity(3, 3) * 2.0,
            bias: DVector::from_element(3, 0.1),
            activation: Activation::Identity,
        },
    ])?;
    let mut out = WeightFile::new(custom);
    out.metadata.insert("note".into(), serde_json::json!("hand-built example"));
    let path = std::env::temp_dir().join("latent_geodesic_example_weights.json");
    out.save(&path)?;
    let back = WeightFile::load(&path)?;
    println!("wrote {} ({} bytes), round trip equal: {}", path.display(), std::fs::metadata(&path)?.len(), back == out);
    Ok(())
}
