//! JSON weight-file schema, version `"1"`.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "d_z": 2,
//!   "d_x": 2,
//!   "generator": {
//!     "kind": "mlp",
//!     "layers": [
//!       { "weights": [[...], ...], "bias": [...], "activation": "tanh" }
//!     ]
//!   },
//!   "metadata": { "activation_hidden": "tanh", "seed": 7 }
//! }
//! ```
//!
//! `weights` is row-major with shape `d_out × d_in`. The other generator kinds
//! are `{"kind": "linear", "matrix": [[...]], "offset": [...]}` with the matrix
//! shaped `d_x × d_z`, and `{"kind": "radial_warp", "inner_radius": r0,
//! "sharpness": s, "twist": τ}`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::mlp::{Activation, DenseLayer, Mlp};
use super::radial::RadialWarp;
use super::{Generator, GeneratorSpec, Linear};
use crate::error::WeightFileError;

pub const SCHEMA_VERSION: &str = "1";

/// A generator together with its provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFile {
    pub generator: GeneratorSpec,
    pub metadata: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct RawFile {
    schema_version: String,
    d_z: usize,
    d_x: usize,
    generator: RawGenerator,
    #[serde(default)]
    metadata: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawGenerator {
    Mlp { layers: Vec<RawLayer> },
    Linear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    RadialWarp(RadialWarp),
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: String,
}

fn rows_to_matrix(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>, WeightFileError> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(WeightFileError::schema(field, "matrix has no rows"));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(WeightFileError::schema(field, "matrix has no columns"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(WeightFileError::schema(
                format!("{field}[{i}]"),
                format!("row has {} entries, expected {ncols}", row.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn check_finite(values: impl IntoIterator<Item = f64>, field: &str) -> Result<(), WeightFileError> {
    match values.into_iter().position(|v| !v.is_finite()) {
        Some(i) => Err(WeightFileError::schema(field, format!("non-finite value at flat index {i}"))),
        None => Ok(()),
    }
}

impl WeightFile {
    pub fn new(generator: GeneratorSpec) -> Self {
        WeightFile {
            generator,
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, WeightFileError> {
        let value: Value = serde_json::from_str(text).map_err(|e| parse_error(text, e))?;
        let raw: RawFile = serde_json::from_value(value)
            .map_err(|e| WeightFileError::schema("<document>", e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WeightFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| WeightFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawFile {
            schema_version: SCHEMA_VERSION.to_string(),
            d_z: self.generator.d_z(),
            d_x: self.generator.d_x(),
            generator: match &self.generator {
                GeneratorSpec::Mlp(mlp) => RawGenerator::Mlp {
                    layers: mlp
                        .layers
                        .iter()
                        .map(|l| RawLayer {
                            weights: matrix_to_rows(&l.weights),
                            bias: l.bias.iter().copied().collect(),
                            activation: l.activation.name().to_string(),
                        })
                        .collect(),
                },
                GeneratorSpec::Linear(lin) => RawGenerator::Linear {
                    matrix: matrix_to_rows(&lin.matrix),
                    offset: lin.offset.iter().copied().collect(),
                },
                GeneratorSpec::RadialWarp(w) => RawGenerator::RadialWarp(*w),
            },
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("weight file serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WeightFileError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|source| WeightFileError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn from_raw(raw: RawFile) -> Result<Self, WeightFileError> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(WeightFileError::schema(
                "schema_version",
                format!("expected \"{SCHEMA_VERSION}\", got \"{}\"", raw.schema_version),
            ));
        }
        let generator = match raw.generator {
            RawGenerator::Mlp { layers } => {
                if layers.is_empty() {
                    return Err(WeightFileError::schema("generator.layers", "no layers"));
                }
                let mut built = Vec::with_capacity(layers.len());
                let mut width = raw.d_z;
                for (i, layer) in layers.into_iter().enumerate() {
                    let field = format!("generator.layers[{i}]");
                    let weights = rows_to_matrix(&layer.weights, &format!("{field}.weights"))?;
                    check_finite(weights.iter().copied(), &format!("{field}.weights"))?;
                    check_finite(layer.bias.iter().copied(), &format!("{field}.bias"))?;
                    if weights.ncols() != width {
                        return Err(WeightFileError::schema(
                            format!("{field}.weights"),
                            format!(
                                "layer {i} takes {} inputs but the previous stage produces {width}",
                                weights.ncols()
                            ),
                        ));
                    }
                    if layer.bias.len() != weights.nrows() {
                        return Err(WeightFileError::schema(
                            format!("{field}.bias"),
                            format!(
                                "layer {i} bias has length {}, expected {}",
                                layer.bias.len(),
                                weights.nrows()
                            ),
                        ));
                    }
                    let activation = Activation::parse(&layer.activation).ok_or_else(|| {
                        WeightFileError::schema(
                            format!("{field}.activation"),
                            format!(
                                "unknown activation \"{}\" (expected one of {})",
                                layer.activation,
                                Activation::NAMES.join(", ")
                            ),
                        )
                    })?;
                    width = weights.nrows();
                    built.push(DenseLayer {
                        weights,
                        bias: DVector::from_vec(layer.bias),
                        activation,
                    });
                }
                if width != raw.d_x {
                    return Err(WeightFileError::schema(
                        "generator.layers",
                        format!("last layer produces {width} outputs but d_x = {}", raw.d_x),
                    ));
                }
                GeneratorSpec::Mlp(Mlp { layers: built })
            }
            RawGenerator::Linear { matrix, offset } => {
                let a = rows_to_matrix(&matrix, "generator.matrix")?;
                check_finite(a.iter().copied(), "generator.matrix")?;
                check_finite(offset.iter().copied(), "generator.offset")?;
                if a.nrows() != raw.d_x || a.ncols() != raw.d_z {
                    return Err(WeightFileError::schema(
                        "generator.matrix",
                        format!(
                            "shape {}×{} does not match d_x×d_z = {}×{}",
                            a.nrows(),
                            a.ncols(),
                            raw.d_x,
                            raw.d_z
                        ),
                    ));
                }
                if offset.len() != raw.d_x {
                    return Err(WeightFileError::schema(
                        "generator.offset",
                        format!("length {} does not match d_x = {}", offset.len(), raw.d_x),
                    ));
                }
                GeneratorSpec::Linear(Linear {
                    matrix: a,
                    offset: DVector::from_vec(offset),
                })
            }
            RawGenerator::RadialWarp(w) => {
                w.validate().map_err(|m| WeightFileError::schema("generator", m))?;
                if raw.d_z != 2 || raw.d_x != 2 {
                    return Err(WeightFileError::schema("d_z", "radial_warp requires d_z = d_x = 2"));
                }
                GeneratorSpec::RadialWarp(w)
            }
        };
        if raw.d_z == 0 || raw.d_z > raw.d_x {
            return Err(WeightFileError::schema(
                "d_z",
                format!("need 1 ≤ d_z ≤ d_x, got d_z = {}, d_x = {}", raw.d_z, raw.d_x),
            ));
        }
        Ok(WeightFile {
            generator,
            metadata: raw.metadata,
        })
    }
}

/// Maps a JSON syntax error to a `Parse` error, except for the non-standard
/// tokens `NaN`/`Infinity` (as written by Python's `json`) which are reported
/// as a schema violation: the document is readable but holds a non-finite
/// parameter.
fn parse_error(text: &str, err: serde_json::Error) -> WeightFileError {
    let (line, column) = (err.line(), err.column());
    if let Some(src_line) = text.lines().nth(line.saturating_sub(1)) {
        if let Some(token) = ["NaN", "Infinity"].into_iter().find(|t| src_line.contains(t)) {
            return WeightFileError::schema(
                format!("line {line}"),
                format!("non-finite value `{token}` is not a valid parameter"),
            );
        }
    }
    WeightFileError::Parse {
        line,
        column,
        message: err.to_string(),
    }
}
