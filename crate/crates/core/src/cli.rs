//! Command-line front end: `interpolate`, `compare` and `validate-weights`.
//!
//! Settings are resolved as defaults, then an optional `--config` JSON file,
//! then flags. The resolved [`RunConfig`] is written to `config.json` in the
//! output directory next to the results.
//!
//! Exit codes: 0 on success, 1 for configuration, schema or solver errors,
//! 2 for I/O failures.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::LatentPrior;
use crate::error::{GeodesicError, WeightFileError};
use crate::eval::{compare_methods, InterpolationReport, OracleConfig};
use crate::generators::{Generator, GeneratorSpec, WeightFile, BUILTIN_NAMES};
use crate::geometry::{default_fd_step, jacobian_fd};
use crate::solver::{curve_regularizer, interpolate_traced, DiscreteCurve, Method, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "latent-geodesic", version, about = "Density-regularized geodesic interpolation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interpolate between two latent points with one method.
    Interpolate(RunArgs),
    /// Run GeodReg, Geod and StraightZ on the same endpoints.
    Compare(RunArgs),
    /// Check a weight file's schema and its analytic Jacobian.
    ValidateWeights(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// JSON run configuration; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in generator: radial-warp, identity, lambertian, toy-gan.
    #[arg(long, conflicts_with = "weights")]
    pub generator: Option<String>,
    /// Weight file (schema version 1).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Start point, comma separated, or @file holding a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    /// End point, comma separated, or @file holding a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    /// straight-z, geod or geod-reg (comma separated list for compare).
    #[arg(long)]
    pub method: Option<String>,
    /// Weight of the density penalty (geod-reg only).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Step size of the relaxation.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Number of curve points including both endpoints.
    #[arg(long)]
    pub k: Option<usize>,
    /// Iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop once the largest point update falls below this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Re-space points to equal ambient chords every N iterations (0 = never).
    #[arg(long)]
    pub resample_every: Option<usize>,
    /// Relative ridge added to the metric before factorizing it.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Also run the grid-graph geodesic oracle (d_z ≤ 3).
    #[arg(long)]
    pub oracle: bool,
    /// Grid nodes per latent axis for the oracle.
    #[arg(long)]
    pub oracle_resolution: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of randomly built generators (lambertian).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    /// Forward-pass fixture file (`{"pairs": [{"z": [...], "x": [...]}]}`).
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSource {
    Builtin(String),
    Weights(PathBuf),
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub generator: GeneratorSource,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub solver: SolverConfig,
    pub methods: Vec<Method>,
    pub oracle: bool,
    pub oracle_resolution: usize,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            generator: GeneratorSource::Builtin("radial-warp".into()),
            from: vec![-1.2, 0.0],
            to: vec![1.2, 0.0],
            solver: SolverConfig::default(),
            methods: vec![Method::GeodReg],
            oracle: false,
            oracle_resolution: 128,
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<GeodesicError> for CliError {
    fn from(e: GeodesicError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<WeightFileError> for CliError {
    fn from(e: WeightFileError) -> Self {
        match e {
            WeightFileError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Interpolate(a) => cmd_interpolate(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::ValidateWeights(a) => cmd_validate_weights(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("error: {m}"),
                CliError::Io(m) => eprintln!("i/o error: {m}"),
            }
            e.code()
        }
    }
}

fn parse_point(spec: &str) -> Result<Vec<f64>, CliError> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path).map_err(|e| io_err(Path::new(path), e))?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{path}: expected a JSON array of numbers ({e})")));
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse `{s}` in point `{spec}`")))
        })
        .collect()
}

fn parse_methods(spec: &str) -> Result<Vec<Method>, CliError> {
    spec.split(',').map(|m| m.trim().parse::<Method>().map_err(CliError::from)).collect()
}

/// defaults < config file < flags
pub fn resolve_config(args: &RunArgs, default_methods: &[Method]) -> Result<RunConfig, String> {
    resolve(args, default_methods).map_err(|e| match e {
        CliError::Config(m) | CliError::Io(m) => m,
    })
}

fn resolve(args: &RunArgs, default_methods: &[Method]) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig {
            methods: default_methods.to_vec(),
            ..RunConfig::default()
        },
    };
    if let Some(name) = &args.generator {
        cfg.generator = GeneratorSource::Builtin(name.clone());
    }
    if let Some(path) = &args.weights {
        cfg.generator = GeneratorSource::Weights(path.clone());
    }
    if let Some(p) = &args.from {
        cfg.from = parse_point(p)?;
    }
    if let Some(p) = &args.to {
        cfg.to = parse_point(p)?;
    }
    if let Some(m) = &args.method {
        cfg.methods = parse_methods(m)?;
    }
    let s = &mut cfg.solver;
    s.mu = args.mu.unwrap_or(s.mu);
    s.eta = args.eta.unwrap_or(s.eta);
    s.k = args.k.unwrap_or(s.k);
    s.max_iters = args.max_iters.unwrap_or(s.max_iters);
    s.tol = args.tol.unwrap_or(s.tol);
    s.resample_every = args.resample_every.unwrap_or(s.resample_every);
    s.ridge = args.ridge.unwrap_or(s.ridge);
    cfg.oracle |= args.oracle;
    cfg.oracle_resolution = args.oracle_resolution.unwrap_or(cfg.oracle_resolution);
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.solver.validate()?;
    if cfg.methods.is_empty() {
        return Err(CliError::Config("no methods selected".into()));
    }
    Ok(cfg)
}

fn load_generator(source: &GeneratorSource, seed: u64) -> Result<GeneratorSpec, CliError> {
    match source {
        GeneratorSource::Builtin(name) if name == "lambertian" => Ok(GeneratorSpec::lambertian(seed)),
        GeneratorSource::Builtin(name) => GeneratorSpec::builtin(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown generator `{name}` (built-ins: {})",
                BUILTIN_NAMES.join(", ")
            ))
        }),
        GeneratorSource::Weights(path) => Ok(GeneratorSpec::load(path)?),
    }
}

fn endpoints(cfg: &RunConfig, f: &GeneratorSpec) -> Result<(DVector<f64>, DVector<f64>), CliError> {
    for (name, p) in [("--from", &cfg.from), ("--to", &cfg.to)] {
        if p.len() != f.d_z() {
            return Err(CliError::Config(format!(
                "{name} has {} coordinates but the generator has d_z = {}",
                p.len(),
                f.d_z()
            )));
        }
    }
    Ok((DVector::from_vec(cfg.from.clone()), DVector::from_vec(cfg.to.clone())))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurvePointRecord {
    pub index: usize,
    pub latent: Vec<f64>,
    pub ambient: Vec<f64>,
    pub rho: Option<f64>,
}

/// Contents of `curve.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CurveFile {
    pub method: String,
    pub k: usize,
    pub points: Vec<CurvePointRecord>,
}

impl CurveFile {
    pub fn build(method: Method, f: &GeneratorSpec, prior: &LatentPrior, curve: &DiscreteCurve, ridge: f64) -> Result<Self, GeodesicError> {
        let points = curve
            .points()
            .iter()
            .enumerate()
            .map(|(index, z)| {
                Ok(CurvePointRecord {
                    index,
                    latent: z.iter().copied().collect(),
                    ambient: f.forward(z)?.iter().copied().collect(),
                    rho: curve_regularizer(f, prior, z, ridge).ok(),
                })
            })
            .collect::<Result<_, GeodesicError>>()?;
        Ok(CurveFile {
            method: method.name().to_string(),
            k: curve.len(),
            points,
        })
    }

    /// Ambient chord length recomputed from the stored coordinates.
    pub fn ambient_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                w[0].ambient
                    .iter()
                    .zip(&w[1].ambient)
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    write_json(&cfg.out, "config.json", cfg)
}

fn cmd_interpolate(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve(args, &[Method::GeodReg])?;
    if cfg.methods.len() != 1 {
        return Err(CliError::Config("interpolate takes exactly one --method".into()));
    }
    let method = cfg.methods[0];
    let f = load_generator(&cfg.generator, cfg.seed)?;
    let (za, zb) = endpoints(&cfg, &f)?;
    let prior = LatentPrior::standard_normal(f.d_z());
    let (curve, trace) = interpolate_traced(method, &f, &prior, &za, &zb, &cfg.solver)?;
    let mut report = InterpolationReport::build(method.name(), &f, &prior, &curve, cfg.solver.ridge)?;
    if let Some(t) = &trace {
        report.iterations = Some(t.iterations());
        report.termination = Some(t.termination);
    }
    prepare_out(&cfg)?;
    write_json(&cfg.out, "curve.json", &CurveFile::build(method, &f, &prior, &curve, cfg.solver.ridge)?)?;
    write_json(&cfg.out, "report.json", &report)?;
    if let Some(t) = &trace {
        write_json(&cfg.out, "trace.json", t)?;
    }
    println!(
        "{}: length {:.6}, energy {:.6}, min log-density {:.6}",
        report.method, report.ambient_length, report.energy, report.min_log_density
    );
    Ok(())
}

fn default_oracle(cfg: &RunConfig, dim: usize) -> OracleConfig {
    let reach = cfg.from.iter().chain(&cfg.to).fold(0.0_f64, |a, &b| a.max(b.abs()));
    OracleConfig {
        ridge: cfg.solver.ridge,
        ..OracleConfig::square(dim, (reach * 1.25).max(1.0), cfg.oracle_resolution)
    }
}

fn cmd_compare(args: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve(args, &Method::ALL)?;
    let f = load_generator(&cfg.generator, cfg.seed)?;
    let (za, zb) = endpoints(&cfg, &f)?;
    let prior = LatentPrior::standard_normal(f.d_z());
    let oracle = (cfg.oracle && f.d_z() <= 3).then(|| default_oracle(&cfg, f.d_z()));
    let cmp = compare_methods(&f, &prior, &za, &zb, &cfg.solver, &cfg.methods, oracle.as_ref())?;
    prepare_out(&cfg)?;
    for (method, curve) in &cmp.curves {
        let file = CurveFile::build(*method, &f, &prior, curve, cfg.solver.ridge)?;
        write_json(&cfg.out, &format!("curve_{}.json", method.name()), &file)?;
    }
    write_json(&cfg.out, "report.json", &cmp)?;
    let csv_path = cfg.out.join("compare.csv");
    fs::write(&csv_path, cmp.to_csv()).map_err(|e| io_err(&csv_path, e))?;
    print!("{}", cmp.to_csv());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ForwardFixtures {
    pairs: Vec<FixturePair>,
}

#[derive(Debug, Deserialize)]
struct FixturePair {
    z: Vec<f64>,
    x: Vec<f64>,
}

/// Largest `|J - J_fd|` scaled by `max(1, max|J|)`.
pub fn jacobian_discrepancy(f: &GeneratorSpec, z: &DVector<f64>) -> Result<f64, GeodesicError> {
    let exact = f.jacobian(z)?;
    let fd = jacobian_fd(f, z, default_fd_step(z))?;
    Ok((&exact - fd).amax() / exact.amax().max(1.0))
}

fn cmd_validate_weights(args: &ValidateArgs) -> Result<(), CliError> {
    const JACOBIAN_TOL: f64 = 1e-4;
    const FIXTURE_TOL: f64 = 1e-5;
    let wf = WeightFile::load(&args.path)?;
    let f = wf.generator;
    println!(
        "schema ok: kind {}, d_z {}, d_x {}",
        f.kind(),
        f.d_z(),
        f.d_x()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst = 0.0_f64;
    let mut checked = 0;
    let mut attempts = 0;
    while checked < args.points {
        attempts += 1;
        if attempts > 1000 * args.points.max(1) {
            return Err(CliError::Config("could not find points away from relu kinks".into()));
        }
        let z = DVector::from_fn(f.d_z(), |_, _| StandardNormal.sample(&mut rng));
        if let GeneratorSpec::Mlp(m) = &f {
            if m.min_relu_margin(&z).is_some_and(|margin| margin <= 1e-3) {
                continue;
            }
        }
        worst = worst.max(jacobian_discrepancy(&f, &z)?);
        checked += 1;
    }
    println!("jacobian check: max discrepancy {worst:.3e} over {checked} points (tolerance {JACOBIAN_TOL:e})");
    if !(worst <= JACOBIAN_TOL) {
        return Err(CliError::Config(format!(
            "analytic Jacobian disagrees with finite differences: {worst:e} > {JACOBIAN_TOL:e}"
        )));
    }
    if let Some(path) = &args.fixtures {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let fixtures: ForwardFixtures =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut worst = 0.0_f64;
        for (i, pair) in fixtures.pairs.iter().enumerate() {
            let x = f.forward(&DVector::from_vec(pair.z.clone()))?;
            if x.len() != pair.x.len() {
                return Err(CliError::Config(format!("fixture {i}: output length mismatch")));
            }
            worst = x.iter().zip(&pair.x).fold(worst, |w, (a, b)| w.max((a - b).abs()));
        }
        println!(
            "forward fixtures: max abs error {worst:.3e} over {} pairs (tolerance {FIXTURE_TOL:e})",
            fixtures.pairs.len()
        );
        if !(worst <= FIXTURE_TOL) {
            return Err(CliError::Config(format!("forward fixtures disagree: {worst:e} > {FIXTURE_TOL:e}")));
        }
    }
    Ok(())
}
