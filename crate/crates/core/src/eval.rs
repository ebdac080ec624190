//! Path diagnostics, the three-way method comparison, and a brute-force
//! grid-graph geodesic used as an independent check on the solver.

use nalgebra::DVector;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::density::LatentPrior;
use crate::error::{GeodesicError, Result};
use crate::generators::Generator;
use crate::solver::{chord_lengths, curve_regularizer, interpolate_traced, DiscreteCurve, Method, SolverConfig, Termination};

/// Chordal ambient length `Σ ‖f(z^{k+1}) - f(z^k)‖`.
pub fn curve_length<G: Generator + ?Sized>(f: &G, curve: &DiscreteCurve) -> Result<f64> {
    Ok(chord_lengths(&curve.ambient(f)?).iter().sum())
}

/// Per-point `ρ(z^k)`. Points where the metric is singular get `+∞`; their
/// indices are returned alongside.
pub fn nll_profile<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    curve: &DiscreteCurve,
    ridge: f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut profile = Vec::with_capacity(curve.len());
    let mut singular = Vec::new();
    for (i, z) in curve.points().iter().enumerate() {
        match curve_regularizer(f, prior, z, ridge) {
            Ok(v) => profile.push(v),
            Err(GeodesicError::SingularMetric(_)) => {
                profile.push(f64::INFINITY);
                singular.push(i);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((profile, singular))
}

/// `1 - cos∠(x^{k+1} - x^k, direction)` for every segment.
pub fn cosine_dissimilarity<G: Generator + ?Sized>(
    f: &G,
    curve: &DiscreteCurve,
    direction: &DVector<f64>,
) -> Result<Vec<f64>> {
    let dn = direction.norm();
    if !(dn > 0.0) {
        return Err(GeodesicError::InvalidConfig("reference direction has zero length".into()));
    }
    let xs = curve.ambient(f)?;
    xs.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let seg = &w[1] - &w[0];
            let n = seg.norm();
            if n == 0.0 {
                return Err(GeodesicError::DegenerateSegment { index: i, length: n });
            }
            Ok(1.0 - seg.dot(direction) / (n * dn))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub method: String,
    pub ambient_length: f64,
    pub energy: f64,
    #[serde(with = "inf_as_string")]
    pub nll_profile: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular_points: Vec<usize>,
    /// `-max ρ` along the path.
    pub min_log_density: f64,
    /// `(length - oracle length) / oracle length`.
    pub oracle_length_gap: Option<f64>,
    pub cosine_dissimilarity_profile: Option<Vec<f64>>,
    pub iterations: Option<usize>,
    pub termination: Option<Termination>,
}

impl InterpolationReport {
    pub fn build<G: Generator + ?Sized>(
        method: &str,
        f: &G,
        prior: &LatentPrior,
        curve: &DiscreteCurve,
        ridge: f64,
    ) -> Result<Self> {
        let (nll, singular) = nll_profile(f, prior, curve, ridge)?;
        let max_nll = nll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(InterpolationReport {
            method: method.to_string(),
            ambient_length: curve_length(f, curve)?,
            energy: curve.energy(f)?,
            nll_profile: nll,
            singular_points: singular,
            min_log_density: -max_nll,
            oracle_length_gap: None,
            cosine_dissimilarity_profile: None,
            iterations: None,
            termination: None,
        })
    }

    pub fn mean_cosine_dissimilarity(&self) -> Option<f64> {
        self.cosine_dissimilarity_profile
            .as_ref()
            .map(|p| p.iter().sum::<f64>() / p.len() as f64)
    }
}

mod inf_as_string {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<Value> = v
            .iter()
            .map(|&x| {
                if x.is_finite() {
                    Value::from(x)
                } else {
                    Value::from("inf")
                }
            })
            .collect();
        vals.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Value>::deserialize(d)?
            .into_iter()
            .map(|v| match v {
                Value::Number(n) => n.as_f64().ok_or_else(|| D::Error::custom("bad number")),
                Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                other => Err(D::Error::custom(format!("expected number or \"inf\", got {other}"))),
            })
            .collect()
    }
}

/// Grid-graph shortest-path settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Grid nodes per latent dimension.
    pub resolution: usize,
    /// Nodes are joined to every node whose index offset has all components
    /// at most this in magnitude (primitive offsets only). In 2-D, radius 1
    /// gives 8 neighbours, radius 2 gives 16 and radius 3 gives 32.
    pub stencil_radius: usize,
    /// Weight of the density penalty on edges; 0 for the plain geodesic.
    pub mu: f64,
    /// Relative ridge, as in [`SolverConfig::ridge`].
    pub ridge: f64,
}

impl OracleConfig {
    pub fn square(dim: usize, half_width: f64, resolution: usize) -> Self {
        OracleConfig {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
            resolution,
            stencil_radius: 3,
            mu: 0.0,
            ridge: 1e-9,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    fn validate(&self, d_z: usize) -> Result<()> {
        let bad = |m: String| Err(GeodesicError::InvalidConfig(m));
        if d_z > 3 {
            return bad(format!("grid oracle supports d_z ≤ 3, got {d_z}"));
        }
        if self.lower.len() != d_z || self.upper.len() != d_z {
            return bad("grid extent does not match latent dimension".into());
        }
        if self.resolution < 16 {
            return bad(format!("resolution must be at least 16, got {}", self.resolution));
        }
        if self.stencil_radius == 0 {
            return bad("stencil radius must be at least 1".into());
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(u > l)) {
            return bad("grid extent is empty".into());
        }
        if !(self.mu >= 0.0) {
            return bad(format!("mu must be non-negative, got {}", self.mu));
        }
        Ok(())
    }

    /// Primitive index offsets in the stencil, one per undirected pair.
    fn offsets(&self, dim: usize) -> Vec<Vec<i64>> {
        let r = self.stencil_radius as i64;
        let span = (2 * r + 1) as usize;
        let mut out = Vec::new();
        for code in 0..span.pow(dim as u32) {
            let mut c = code;
            let off: Vec<i64> = (0..dim)
                .map(|_| {
                    let v = (c % span) as i64 - r;
                    c /= span;
                    v
                })
                .collect();
            let g = off.iter().fold(0_i64, |g, &v| gcd(g, v.abs()));
            if g != 1 {
                continue;
            }
            // keep the lexicographically positive half
            if off.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
                out.push(off);
            }
        }
        out
    }

    pub fn neighbor_count(&self, dim: usize) -> usize {
        2 * self.offsets(dim).len()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePath {
    pub points: Vec<Vec<f64>>,
    /// Ambient chordal length of the path.
    pub length: f64,
    /// Total edge cost including the density penalty.
    pub cost: f64,
    pub min_log_density: f64,
}

/// Shortest path between `z_a` and `z_b` on a regular latent grid with
/// ambient chord edge weights `‖f(z_i) - f(z_j)‖ · (1 + μ ρ̄)`, where `ρ̄` is
/// the mean of `ρ` at the two ends. Weights are clamped at zero because `ρ`
/// may be negative where the generator contracts space.
pub fn graph_geodesic_oracle<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    z_a: &DVector<f64>,
    z_b: &DVector<f64>,
    oc: &OracleConfig,
) -> Result<OraclePath> {
    let dim = f.d_z();
    oc.validate(dim)?;
    for (name, z) in [("start", z_a), ("end", z_b)] {
        if z.len() != dim {
            return Err(GeodesicError::DimensionMismatch {
                expected: dim,
                actual: z.len(),
                context: "oracle endpoint",
            });
        }
        if (0..dim).any(|i| z[i] < oc.lower[i] || z[i] > oc.upper[i]) {
            return Err(GeodesicError::UnreachableEndpoint(format!(
                "{name} point {:?} lies outside the grid extent",
                z.as_slice()
            )));
        }
    }

    let n = oc.resolution;
    let spacing: Vec<f64> = (0..dim).map(|i| (oc.upper[i] - oc.lower[i]) / (n - 1) as f64).collect();
    let total = n.pow(dim as u32);
    let unflatten = |mut idx: usize| -> Vec<usize> {
        (0..dim)
            .map(|_| {
                let v = idx % n;
                idx /= n;
                v
            })
            .collect()
    };
    let flatten = |ix: &[usize]| ix.iter().rev().fold(0, |acc, &v| acc * n + v);
    let coord = |ix: &[usize]| DVector::from_fn(dim, |i, _| oc.lower[i] + ix[i] as f64 * spacing[i]);

    let mut latent = Vec::with_capacity(total + 2);
    let mut images = Vec::with_capacity(total + 2);
    let mut rho = Vec::with_capacity(total + 2);
    let mut add_node = |z: DVector<f64>| -> Result<()> {
        images.push(f.forward(&z)?);
        rho.push(match curve_regularizer(f, prior, &z, oc.ridge) {
            Ok(v) => v,
            Err(GeodesicError::SingularMetric(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        });
        latent.push(z);
        Ok(())
    };
    for idx in 0..total {
        add_node(coord(&unflatten(idx)))?;
    }
    let start = total;
    let goal = total + 1;
    add_node(z_a.clone())?;
    add_node(z_b.clone())?;

    let weight = |i: usize, j: usize| -> Option<f64> {
        let chord = (&images[i] - &images[j]).norm();
        if oc.mu == 0.0 {
            return Some(chord);
        }
        let mean_rho = 0.5 * (rho[i] + rho[j]);
        mean_rho.is_finite().then(|| (chord * (1.0 + oc.mu * mean_rho)).max(0.0))
    };

    let mut graph: UnGraph<(), f64> = UnGraph::with_capacity(total + 2, total * 8);
    for _ in 0..total + 2 {
        graph.add_node(());
    }
    let offsets = oc.offsets(dim);
    for idx in 0..total {
        let ix = unflatten(idx);
        for off in &offsets {
            let mut jx = Vec::with_capacity(dim);
            for d in 0..dim {
                let v = ix[d] as i64 + off[d];
                if v < 0 || v >= n as i64 {
                    break;
                }
                jx.push(v as usize);
            }
            if jx.len() != dim {
                continue;
            }
            let j = flatten(&jx);
            if let Some(w) = weight(idx, j) {
                graph.add_edge(NodeIndex::new(idx), NodeIndex::new(j), w);
            }
        }
    }
    // endpoints join every grid node within the stencil box around them
    let reach = oc.stencil_radius as f64 + 0.5;
    for end in [start, goal] {
        let z = &latent[end];
        let lo: Vec<usize> = (0..dim)
            .map(|i| (((z[i] - oc.lower[i]) / spacing[i] - reach).ceil().max(0.0)) as usize)
            .collect();
        let hi: Vec<usize> = (0..dim)
            .map(|i| (((z[i] - oc.lower[i]) / spacing[i] + reach).floor() as usize).min(n - 1))
            .collect();
        let mut ix = lo.clone();
        'cells: loop {
            let j = flatten(&ix);
            if let Some(w) = weight(end, j) {
                graph.add_edge(NodeIndex::new(end), NodeIndex::new(j), w);
            }
            for d in 0..dim {
                if ix[d] < hi[d] {
                    ix[d] += 1;
                    continue 'cells;
                }
                ix[d] = lo[d];
            }
            break;
        }
    }
    if let Some(w) = weight(start, goal) {
        let direct = (0..dim).all(|i| (z_a[i] - z_b[i]).abs() <= reach * spacing[i]);
        if direct {
            graph.add_edge(NodeIndex::new(start), NodeIndex::new(goal), w);
        }
    }

    let goal_ix = NodeIndex::new(goal);
    let (cost, path) = petgraph::algo::astar(&graph, NodeIndex::new(start), |v| v == goal_ix, |e| *e.weight(), |_| 0.0)
        .ok_or_else(|| {
            GeodesicError::UnreachableEndpoint("no grid path joins the endpoints; widen the extent or refine the grid".into())
        })?;
    let ids: Vec<usize> = path.iter().map(|v| v.index()).collect();
    let length = ids.windows(2).map(|w| (&images[w[1]] - &images[w[0]]).norm()).sum();
    let max_rho = ids.iter().map(|&i| rho[i]).fold(f64::NEG_INFINITY, f64::max);
    Ok(OraclePath {
        points: ids.iter().map(|&i| latent[i].iter().copied().collect()).collect(),
        length,
        cost,
        min_log_density: -max_rho,
    })
}

/// All three methods on the same endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reports: Vec<InterpolationReport>,
    pub oracle: Option<OraclePath>,
    #[serde(skip)]
    pub curves: Vec<(Method, DiscreteCurve)>,
}

impl Comparison {
    pub fn report(&self, method: Method) -> Option<&InterpolationReport> {
        self.reports.iter().find(|r| r.method == method.name())
    }

    pub fn curve(&self, method: Method) -> Option<&DiscreteCurve> {
        self.curves.iter().find(|(m, _)| *m == method).map(|(_, c)| c)
    }

    /// `method,length,energy,min_log_density,oracle_gap`, one row per method
    /// and a final `oracle` row when an oracle was run.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,length,energy,min_log_density,oracle_gap\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.reports {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.method,
                r.ambient_length,
                r.energy,
                r.min_log_density,
                opt(r.oracle_length_gap)
            ));
        }
        if let Some(o) = &self.oracle {
            out.push_str(&format!("oracle,{},,{},0\n", o.length, o.min_log_density));
        }
        out
    }
}

/// Runs GeodReg, Geod and StraightZ with identical endpoints. The cosine
/// profile is taken against the ambient chord `f(z_b) - f(z_a)`.
pub fn compare<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    z_a: &DVector<f64>,
    z_b: &DVector<f64>,
    cfg: &SolverConfig,
    oracle: Option<&OracleConfig>,
) -> Result<Comparison> {
    compare_methods(f, prior, z_a, z_b, cfg, &Method::ALL, oracle)
}

/// [`compare`] restricted to a subset of methods.
pub fn compare_methods<G: Generator + ?Sized>(
    f: &G,
    prior: &LatentPrior,
    z_a: &DVector<f64>,
    z_b: &DVector<f64>,
    cfg: &SolverConfig,
    methods: &[Method],
    oracle: Option<&OracleConfig>,
) -> Result<Comparison> {
    let direction = f.forward(z_b)? - f.forward(z_a)?;
    let oracle_path = match oracle {
        Some(oc) if f.d_z() <= 3 => Some(graph_geodesic_oracle(f, prior, z_a, z_b, oc)?),
        _ => None,
    };
    let mut reports = Vec::with_capacity(3);
    let mut curves = Vec::with_capacity(3);
    for &method in methods {
        let (curve, trace) = interpolate_traced(method, f, prior, z_a, z_b, cfg)?;
        let mut report = InterpolationReport::build(method.name(), f, prior, &curve, cfg.ridge)?;
        if direction.norm() > 0.0 {
            report.cosine_dissimilarity_profile = cosine_dissimilarity(f, &curve, &direction).ok();
        }
        if let Some(o) = &oracle_path {
            report.oracle_length_gap = Some((report.ambient_length - o.length) / o.length);
        }
        if let Some(t) = trace {
            report.iterations = Some(t.iterations());
            report.termination = Some(t.termination);
        }
        reports.push(report);
        curves.push((method, curve));
    }
    Ok(Comparison {
        reports,
        oracle: oracle_path,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorSpec;
    use crate::solver::straight_z;
    use nalgebra::dvector;

    #[test]
    fn identity_length() {
        let f = GeneratorSpec::identity(2);
        for k in [2, 5, 35] {
            let c = straight_z(&dvector![0.0, 0.0], &dvector![3.0, 4.0], k).unwrap();
            assert!((curve_length(&f, &c).unwrap() - 5.0).abs() < 1e-12);
        }
        let z = dvector![1.0, 1.0];
        assert_eq!(curve_length(&f, &straight_z(&z, &z, 2).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn nll_at_origin_of_identity() {
        let f = GeneratorSpec::identity(2);
        let c = straight_z(&dvector![-1.0, 0.0], &dvector![1.0, 0.0], 3).unwrap();
        let (p, singular) = nll_profile(&f, &LatentPrior::standard_normal(2), &c, 0.0).unwrap();
        assert!((p[1] - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
        assert!(singular.is_empty());
    }

    #[test]
    fn nll_flags_singular_points() {
        // f(z) = (z0, z0): rank one everywhere
        let f = GeneratorSpec::linear(nalgebra::dmatrix![1.0, 0.0; 1.0, 0.0], dvector![0.0, 0.0]).unwrap();
        let c = straight_z(&dvector![0.0, 0.0], &dvector![1.0, 0.0], 3).unwrap();
        let (p, singular) = nll_profile(&f, &LatentPrior::standard_normal(2), &c, 0.0).unwrap();
        assert_eq!(singular, vec![0, 1, 2]);
        assert!(p.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn cosine_extremes() {
        let f = GeneratorSpec::identity(2);
        let c = straight_z(&dvector![0.0, 0.0], &dvector![2.0, 0.0], 4).unwrap();
        let aligned = cosine_dissimilarity(&f, &c, &dvector![1.0, 0.0]).unwrap();
        assert!(aligned.iter().all(|&v| v.abs() < 1e-15));
        let ortho = cosine_dissimilarity(&f, &c, &dvector![0.0, 3.0]).unwrap();
        assert!(ortho.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(cosine_dissimilarity(&f, &c, &dvector![0.0, 0.0]).is_err());
        let z = dvector![0.0, 0.0];
        assert!(matches!(
            cosine_dissimilarity(&f, &straight_z(&z, &z, 3).unwrap(), &dvector![1.0, 0.0]),
            Err(GeodesicError::DegenerateSegment { .. })
        ));
    }

    #[test]
    fn stencil_sizes() {
        let oc = OracleConfig::square(2, 1.0, 16);
        assert_eq!(oc.neighbor_count(2), 32);
        assert_eq!(OracleConfig { stencil_radius: 2, ..oc.clone() }.neighbor_count(2), 16);
        assert_eq!(OracleConfig { stencil_radius: 1, ..oc.clone() }.neighbor_count(2), 8);
        assert_eq!(OracleConfig { stencil_radius: 1, ..oc }.neighbor_count(3), 26);
    }

    #[test]
    fn oracle_on_flat_map() {
        let f = GeneratorSpec::identity(2);
        let oc = OracleConfig::square(2, 2.0, 33);
        let (a, b) = (dvector![-1.3, -0.4], dvector![1.1, 0.9]);
        let o = graph_geodesic_oracle(&f, &LatentPrior::standard_normal(2), &a, &b, &oc).unwrap();
        let exact = (&b - &a).norm();
        // 32-neighbour stencil: worst-case direction error below 1 %
        assert!(o.length >= exact - 1e-12 && o.length < exact * 1.03, "{} vs {exact}", o.length);
    }

    #[test]
    fn oracle_rejects_bad_configs() {
        let f = GeneratorSpec::identity(2);
        let p = LatentPrior::standard_normal(2);
        let oc = OracleConfig::square(2, 1.0, 16);
        assert!(matches!(
            graph_geodesic_oracle(&f, &p, &dvector![0.0, 0.0], &dvector![3.0, 0.0], &oc),
            Err(GeodesicError::UnreachableEndpoint(_))
        ));
        let coarse = OracleConfig::square(2, 1.0, 8);
        assert!(graph_geodesic_oracle(&f, &p, &dvector![0.0, 0.0], &dvector![0.5, 0.0], &coarse).is_err());
        let high = GeneratorSpec::identity(4);
        let oc4 = OracleConfig::square(4, 1.0, 16);
        assert!(graph_geodesic_oracle(&high, &LatentPrior::standard_normal(4), &DVector::zeros(4), &DVector::zeros(4), &oc4).is_err());
    }

    #[test]
    fn report_json_round_trip_with_infinity() {
        let r = InterpolationReport {
            method: "geod".into(),
            ambient_length: 1.5,
            energy: 2.0,
            nll_profile: vec![1.0, f64::INFINITY],
            singular_points: vec![1],
            min_log_density: f64::MIN,
            oracle_length_gap: None,
            cosine_dissimilarity_profile: None,
            iterations: Some(3),
            termination: Some(Termination::Converged),
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"inf\""));
        let back: InterpolationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
