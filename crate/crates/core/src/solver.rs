//! Discrete geodesic relaxation with the density penalty.
//!
//! Each iteration maps the curve into `X`, takes unit chords
//! `v^k = (x^{k+1} - x^k) / ‖x^{k+1} - x^k‖`, forms `a^k = v^k - v^{k-1}`,
//! pulls `a^k` back through the ridged normal equations and moves every
//! interior point by `η (b^k - μ ∇ρ(z^k))`. All points are updated from the
//! same snapshot; endpoints never move.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::density::{regularizer, regularizer_grad, LatentPrior};
use crate::error::{GeodesicError, Result};
use crate::generators::Generator;
use crate::geometry::{default_fd_step, pullback_metric, pullback_vector};

/// Chords shorter than this count as collapsed.
pub const MIN_SEGMENT: f64 = 1e-12;

/// Ordered latent points; the first and last are the pinned endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    points: Vec<DVector<f64>>,
}

impl DiscreteCurve {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(GeodesicError::InvalidConfig(format!(
                "a curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(GeodesicError::DimensionMismatch {
                    expected: dim,
                    actual: p.len(),
                    context: "curve point",
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(GeodesicError::InvalidConfig("curve point has a non-finite coordinate".into()));
            }
        }
        Ok(DiscreteCurve { points })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn start(&self) -> &DVector<f64> {
        &self.points[0]
    }

    pub fn end(&self) -> &DVector<f64> {
        &self.points[self.points.len() - 1]
    }

    pub fn ambient<G: Generator + ?Sized>(&self, f: &G) -> Result<Vec<DVector<f64>>> {
        self.points.iter().map(|z| f.forward(z)).collect()
    }

    /// Ambient energy `Σ ‖Δx‖² / (2Δt)` with `Δt = 1/(K-1)`.
    pub fn energy<G: Generator + ?Sized>(&self, f: &G) -> Result<f64> {
        Ok(energy_of(&self.ambient(f)?))
    }
}

pub(crate) fn chord_lengths(xs: &[DVector<f64>]) -> Vec<f64> {
    xs.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect()
}

pub(crate) fn energy_of(xs: &[DVector<f64>]) -> f64 {
    let segments = (xs.len() - 1) as f64;
    0.5 * segments * xs.windows(2).map(|w| (&w[1] - &w[0]).norm_squared()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Number of curve points including both endpoints.
    pub k: usize,
    pub eta: f64,
    pub mu: f64,
    pub max_iters: usize,
    /// Stop once the largest interior update is below this.
    pub tol: f64,
    /// Relative ridge; the absolute ridge is `ridge · trace(g) / d_z`.
    pub ridge: f64,
    /// Finite-difference step for `∇ρ`; `None` uses `1e-4 (1 + ‖z‖∞)`.
    pub fd_step: Option<f64>,
    /// Re-space points to equal ambient chords every this many iterations
    /// and once more at termination. 0 disables it.
    pub resample_every: usize,
    /// Sine-bump offset, relative to the latent chord, applied to the
    /// initial straight line when `μ > 0`. The density penalty is even
    /// under `z -> -z` for odd generators, so a straight line through a
    /// symmetric hole is a stationary point it cannot leave on its own.
    pub init_bow: f64,
    /// Cap on a single point's displacement per iteration, relative to the
    /// latent chord `‖z_b - z_a‖`. 0 disables it. Where `g` is nearly
    /// singular the pulled-back direction is huge and an uncapped step can
    /// throw a point into a saturated region with `J = 0`.
    pub max_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 35,
            eta: 0.01,
            mu: 0.02,
            max_iters: 2000,
            tol: 1e-6,
            ridge: 1e-9,
            fd_step: None,
            resample_every: 50,
            init_bow: 0.02,
            max_step: 0.02,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GeodesicError::InvalidConfig(m));
        if self.k < 3 {
            return bad(format!("k must be at least 3, got {}", self.k));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be non-negative, got {}", self.mu));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return bad(format!("ridge must be non-negative, got {}", self.ridge));
        }
        if let Some(h) = self.fd_step {
            if !(h > 0.0) {
                return bad(format!("fd_step must be positive, got {h}"));
            }
        }
        if !(self.max_step >= 0.0 && self.max_step.is_finite()) {
            return bad(format!("max_step must be non-negative, got {}", self.max_step));
        }
        if !(self.init_bow >= 0.0 && self.init_bow.is_finite()) {
            return bad(format!("init_bow must be non-negative, got {}", self.init_bow));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub energy: f64,
    pub loss: f64,
    pub max_update_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
}

/// Per-iteration history of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub initial_energy: f64,
    pub records: Vec<IterRecord>,
    pub termination: Termination,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.initial_energy).chain(self.records.iter().map(|r| r.energy))
    }
}

/// A failed solve: the error plus everything computed before it.
#[derive(Debug, Clone)]
pub struct SolveAbort {
    pub error: GeodesicError,
    pub curve: DiscreteCurve,
    pub trace: SolveTrace,
}

impl fmt::Display for SolveAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.trace.iterations())
    }
}

impl std::error::Error for SolveAbort {}

impl From<SolveAbort> for GeodesicError {
    fn from(a: SolveAbort) -> Self {
        a.error
    }
}

/// `K` evenly spaced latent points from `z_a` to `z_b` inclusive.
pub fn straight_z(z_a: &DVector<f64>, z_b: &DVector<f64>, k: usize) -> Result<DiscreteCurve> {
    if z_a.len() != z_b.len() {
        return Err(GeodesicError::DimensionMismatch {
            expected: z_a.len(),
            actual: z_b.len(),
            context: "endpoint",
        });
    }
    if k < 2 {
        return Err(GeodesicError::InvalidConfig(format!("k must be at least 2, got {k}")));
    }
    if z_a == z_b {
        return DiscreteCurve::new(vec![z_a.clone(); k]);
    }
    let last = (k - 1) as f64;
    let mut points: Vec<_> = (0..k)
        .map(|i| {
            let t = i as f64 / last;
            z_a * (1.0 - t) + z_b * t
        })
        .collect();
    points[0] = z_a.clone();
    points[k - 1] = z_b.clone();
    DiscreteCurve::new(points)
}

/// Offsets interior points of a straight curve by `bow·‖z_b - z_a‖·sin(πt)`
/// along a fixed direction orthogonal to the chord.
fn bowed(curve: DiscreteCurve, bow: f64) -> DiscreteCurve {
    let d = curve.dim();
    let chord = curve.end() - curve.start();
    let len = chord.norm();
    if bow == 0.0 || d < 2 || len == 0.0 {
        return curve;
    }
    let unit = &chord / len;
    let axis = (0..d)
        .min_by(|&a, &b| unit[a].abs().total_cmp(&unit[b].abs()))
        .unwrap();
    let mut normal = DVector::zeros(d);
    normal[axis] = 1.0;
    normal -= &unit * unit[axis];
    normal.normalize_mut();
    let k = curve.len();
    let mut points = curve.points;
    for (i, p) in points.iter_mut().enumerate().take(k - 1).skip(1) {
        let t = i as f64 / (k - 1) as f64;
        *p += &normal * (bow * len * (std::f64::consts::PI * t).sin());
    }
    DiscreteCurve { points }
}

fn fd_step_for(cfg: &SolverConfig, z: &DVector<f64>) -> f64 {
    cfg.fd_step.unwrap_or_else(|| default_fd_step(z))
}

/// Unit chords `v^k`, failing on collapsed segments.
fn unit_chords(xs: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    xs.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let d = &w[1] - &w[0];
            let n = d.norm();
            if n > MIN_SEGMENT {
                Ok(d / n)
            } else {
                Err(GeodesicError::DegenerateSegment { index: i, length: n })
            }
        })
        .collect()
}

/// Pulled-back straightening directions `b^k` for every interior point.
pub fn straightening_directions<G: Generator + ?Sized>(
    f: &G,
    curve: &DiscreteCurve,
    ridge_rel: f64,
) -> Result<Vec<DVector<f64>>> {
    let xs = curve.ambient(f)?;
    let v = unit_chords(&xs)?;
    (1..curve.len() - 1)
        .map(|k| {
            let jac = f.jacobian(&curve.points[k])?;
            let ridge = pullback_metric(&jac).scaled_ridge(ridge_rel);
            let a = &v[k] - &v[k - 1];
            pullback_vector(&jac, &a, ridge)
        })
        .collect()
}

/// Density penalty with the solver's ridge convention.
pub fn curve_regularizer<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    z: &DVector<f64>,
    ridge_rel: f64,
) -> Result<f64> {
    let ridge = pullback_metric(&f.jacobian(z)?).scaled_ridge(ridge_rel);
    regularizer(f, prior, z, ridge)
}

/// Discrete regularized loss `E + μ Σ w_k ρ(z^k) Δt` (trapezoid weights).
pub fn regularized_loss<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    curve: &DiscreteCurve,
    cfg: &SolverConfig,
) -> Result<f64> {
    let energy = curve.energy(f)?;
    if cfg.mu == 0.0 {
        return Ok(energy);
    }
    let k = curve.len();
    let dt = 1.0 / (k - 1) as f64;
    let mut integral = 0.0;
    for (i, z) in curve.points.iter().enumerate() {
        let w = if i == 0 || i == k - 1 { 0.5 } else { 1.0 };
        integral += w * curve_regularizer(f, prior, z, cfg.ridge)?;
    }
    Ok(energy + cfg.mu * integral * dt)
}

/// One Jacobi sweep of the update. Returns the new curve and the largest
/// interior displacement.
pub fn step<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    curve: &DiscreteCurve,
    cfg: &SolverConfig,
) -> Result<(DiscreteCurve, f64)> {
    let directions = straightening_directions(f, curve, cfg.ridge)?;
    let cap = cfg.max_step * (curve.end() - curve.start()).norm();
    let mut points = curve.points.clone();
    let mut max_update = 0.0_f64;
    for (offset, b) in directions.into_iter().enumerate() {
        let k = offset + 1;
        let z = &curve.points[k];
        let mut delta = b;
        if cfg.mu > 0.0 {
            let ridge = pullback_metric(&f.jacobian(z)?).scaled_ridge(cfg.ridge);
            let grad = regularizer_grad(f, prior, z, ridge, fd_step_for(cfg, z))?;
            delta -= grad * cfg.mu;
        }
        delta *= cfg.eta;
        let n = delta.norm();
        if cap > 0.0 && n > cap {
            delta *= cap / n;
        }
        max_update = max_update.max(delta.norm());
        points[k] += delta;
    }
    Ok((DiscreteCurve::new(points)?, max_update))
}

/// Re-spaces interior points to equal ambient chord lengths by linear
/// interpolation in `Z` along the current polyline. A few passes are made
/// because the ambient image of a latent segment is curved.
pub fn resample_uniform<G: Generator + ?Sized>(f: &G, curve: &DiscreteCurve) -> Result<DiscreteCurve> {
    const PASSES: usize = 3;
    let mut current = curve.clone();
    let k = curve.len();
    for _ in 0..PASSES {
        let xs = current.ambient(f)?;
        let chords = chord_lengths(&xs);
        let total: f64 = chords.iter().sum();
        if total <= MIN_SEGMENT {
            return Ok(current);
        }
        let mut points = Vec::with_capacity(k);
        points.push(current.points[0].clone());
        let mut seg = 0;
        let mut seg_start = 0.0;
        for j in 1..k - 1 {
            let target = total * j as f64 / (k - 1) as f64;
            while seg < chords.len() - 1 && seg_start + chords[seg] < target {
                seg_start += chords[seg];
                seg += 1;
            }
            let frac = if chords[seg] > 0.0 {
                ((target - seg_start) / chords[seg]).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let a = &current.points[seg];
            let b = &current.points[seg + 1];
            points.push(a + (b - a) * frac);
        }
        points.push(current.points[k - 1].clone());
        current = DiscreteCurve::new(points)?;
    }
    Ok(current)
}

/// Runs the relaxation from a straight latent line until the largest update
/// drops below `tol` or `max_iters` is reached.
pub fn solve<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    z_a: &DVector<f64>,
    z_b: &DVector<f64>,
    cfg: &SolverConfig,
) -> std::result::Result<(DiscreteCurve, SolveTrace), SolveAbort> {
    let mut trace = SolveTrace {
        initial_energy: f64::NAN,
        records: Vec::new(),
        termination: Termination::MaxIters,
    };
    let early = |error: GeodesicError, trace: &SolveTrace| SolveAbort {
        error,
        curve: DiscreteCurve {
            points: vec![z_a.clone(), z_b.clone()],
        },
        trace: trace.clone(),
    };
    if let Err(e) = cfg.validate() {
        return Err(early(e, &trace));
    }
    for z in [z_a, z_b] {
        if z.len() != f.d_z() {
            let e = GeodesicError::DimensionMismatch {
                expected: f.d_z(),
                actual: z.len(),
                context: "endpoint",
            };
            return Err(early(e, &trace));
        }
    }
    let initial = match straight_z(z_a, z_b, cfg.k) {
        Ok(c) => c,
        Err(e) => return Err(early(e, &trace)),
    };
    if z_a == z_b {
        trace.initial_energy = 0.0;
        trace.termination = Termination::Converged;
        return Ok((initial, trace));
    }
    let mut curve = if cfg.mu > 0.0 { bowed(initial, cfg.init_bow) } else { initial };
    match curve.energy(f) {
        Ok(e) => trace.initial_energy = e,
        Err(e) => return Err(early(e, &trace)),
    }

    let abort = |error, curve: &DiscreteCurve, trace: &SolveTrace| SolveAbort {
        error,
        curve: curve.clone(),
        trace: trace.clone(),
    };

    for iter in 1..=cfg.max_iters {
        let (next, max_update) = match step(f, prior, &curve, cfg) {
            Ok(r) => r,
            Err(e) => return Err(abort(e, &curve, &trace)),
        };
        curve = next;
        if cfg.resample_every > 0 && iter % cfg.resample_every == 0 {
            curve = resample_uniform(f, &curve).map_err(|e| abort(e, &curve, &trace))?;
        }
        let energy = curve.energy(f).map_err(|e| abort(e, &curve, &trace))?;
        let loss = regularized_loss(f, prior, &curve, cfg).map_err(|e| abort(e, &curve, &trace))?;
        trace.records.push(IterRecord {
            energy,
            loss,
            max_update_norm: max_update,
        });
        if max_update < cfg.tol {
            trace.termination = Termination::Converged;
            break;
        }
    }
    if cfg.resample_every > 0 {
        curve = resample_uniform(f, &curve).map_err(|e| abort(e, &curve, &trace))?;
    }
    Ok((curve, trace))
}

/// The three interpolation schemes compared in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    StraightZ,
    Geod,
    GeodReg,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::GeodReg, Method::Geod, Method::StraightZ];

    pub fn name(self) -> &'static str {
        match self {
            Method::StraightZ => "straight_z",
            Method::Geod => "geod",
            Method::GeodReg => "geod_reg",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = GeodesicError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "straight_z" | "straightz" => Ok(Method::StraightZ),
            "geod" => Ok(Method::Geod),
            "geod_reg" | "geodreg" => Ok(Method::GeodReg),
            _ => Err(GeodesicError::InvalidConfig(format!(
                "unknown method `{s}` (valid: straight-z, geod, geod-reg)"
            ))),
        }
    }
}

/// Runs one method and returns the curve together with its trace (empty for
/// `StraightZ`).
pub fn interpolate_traced<G: Generator + ?Sized>(
    method: Method,
    f: &G,
    prior: &LatentPrior,
    z_a: &DVector<f64>,
    z_b: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<(DiscreteCurve, Option<SolveTrace>)> {
    cfg.validate()?;
    match method {
        Method::StraightZ => {
            for z in [z_a, z_b] {
                if z.len() != f.d_z() {
                    return Err(GeodesicError::DimensionMismatch {
                        expected: f.d_z(),
                        actual: z.len(),
                        context: "endpoint",
                    });
                }
            }
            Ok((straight_z(z_a, z_b, cfg.k)?, None))
        }
        Method::Geod => {
            let cfg = SolverConfig { mu: 0.0, ..cfg.clone() };
            let (c, t) = solve(f, prior, z_a, z_b, &cfg)?;
            Ok((c, Some(t)))
        }
        Method::GeodReg => {
            if cfg.mu <= 0.0 {
                return Err(GeodesicError::InvalidConfig(
                    "geod_reg requires mu > 0 (use geod for the unregularized geodesic)".into(),
                ));
            }
            let (c, t) = solve(f, prior, z_a, z_b, cfg)?;
            Ok((c, Some(t)))
        }
    }
}

pub fn interpolate<G: Generator + ?Sized>(
    method: Method,
    f: &G,
    prior: &LatentPrior,
    z_a: &DVector<f64>,
    z_b: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<DiscreteCurve> {
    interpolate_traced(method, f, prior, z_a, z_b, cfg).map(|(c, _)| c)
}
