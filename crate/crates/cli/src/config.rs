//! Scenario files.
//!
//! A scenario is a JSON document. Complex numbers are `[re, im]` pairs and
//! matrices are lists of rows:
//!
//! ```json
//! {
//!   "n": 2,
//!   "family": "bell",
//!   "rho": { "random": 3 },
//!   "trials": 1000,
//!   "seed": 7
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use teleport_core::tensor::CMatrix;
use teleport_core::C64;
use thiserror::Error;

pub const CONFIG_SCHEMA_VERSION: &str = "1";

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Maximal,
    Sign,
    Bell,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    /// `"identity"`.
    Named(String),
    Haar { haar: u64 },
    Matrix(MatrixRows),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RhoSpec {
    Random { random: u64 },
    Matrix(MatrixRows),
}

// Hand-written visitors instead of `#[serde(untagged)]`, so that a malformed
// matrix is reported at the offending entry rather than at the end of the
// whole value.

/// Reads `{"<key>": <u64>}`.
fn seeded_map<'de, A: MapAccess<'de>>(
    mut map: A,
    key: &'static str,
    expected: &'static [&'static str],
) -> Result<u64, A::Error> {
    let mut seed = None;
    while let Some(k) = map.next_key::<String>()? {
        if k != key {
            return Err(de::Error::unknown_field(&k, expected));
        }
        if seed.is_some() {
            return Err(de::Error::duplicate_field(key));
        }
        seed = Some(map.next_value()?);
    }
    seed.ok_or_else(|| de::Error::missing_field(key))
}

fn matrix_seq<'de, A: SeqAccess<'de>>(mut seq: A) -> Result<MatrixRows, A::Error> {
    let mut rows = Vec::new();
    while let Some(row) = seq.next_element()? {
        rows.push(row);
    }
    Ok(rows)
}

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LambdaSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"identity\", {\"haar\": seed} or a matrix of [re, im] pairs")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<LambdaSpec, E> {
                Ok(LambdaSpec::Named(v.to_string()))
            }
            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<LambdaSpec, A::Error> {
                seeded_map(map, "haar", &["haar"]).map(|haar| LambdaSpec::Haar { haar })
            }
            fn visit_seq<A: SeqAccess<'de>>(self, seq: A) -> Result<LambdaSpec, A::Error> {
                matrix_seq(seq).map(LambdaSpec::Matrix)
            }
        }
        d.deserialize_any(V)
    }
}

impl<'de> Deserialize<'de> for RhoSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RhoSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("{\"random\": seed} or a matrix of [re, im] pairs")
            }
            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<RhoSpec, A::Error> {
                seeded_map(map, "random", &["random"]).map(|random| RhoSpec::Random { random })
            }
            fn visit_seq<A: SeqAccess<'de>>(self, seq: A) -> Result<RhoSpec, A::Error> {
                matrix_seq(seq).map(RhoSpec::Matrix)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomXi {
    pub label: String,
    pub coefficients: MatrixRows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema_version: String,
    pub n: usize,
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_xi: Option<Vec<CustomXi>>,
    pub rho: RhoSpec,
    #[serde(default)]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn default_schema() -> String {
    CONFIG_SCHEMA_VERSION.to_string()
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}:{line}: {field}: {message}")]
    Invalid { path: String, line: usize, field: String, message: String },
}

/// Line of the first occurrence of `"key"` in the source, or 1.
fn line_of(source: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    source.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

pub fn matrix_from_rows(rows: &MatrixRows) -> Result<CMatrix, String> {
    let n = rows.len();
    if n == 0 {
        return Err("matrix has no rows".into());
    }
    let m = rows[0].len();
    if m == 0 {
        return Err("matrix row 0 is empty".into());
    }
    let mut data = Vec::with_capacity(n * m);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != m {
            return Err(format!("row {i} has {} entries, expected {m}", r.len()));
        }
        data.extend(r.iter().map(|&[re, im]| C64::new(re, im)));
    }
    CMatrix::from_vec(n, m, data).map_err(|e| e.to_string())
}

pub fn rows_from_matrix(m: &CMatrix) -> MatrixRows {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl ScenarioConfig {
    pub fn from_str(source: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(source).map_err(|e| ConfigError::Parse {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate(source, path)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let display = path.display().to_string();
        let source = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: display.clone(), message: e.to_string() })?;
        Self::from_str(&source, &display)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(teleport_core::STRUCTURAL_TOL)
    }

    fn validate(&self, source: &str, path: &str) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: String| ConfigError::Invalid {
            path: path.to_string(),
            line: line_of(source, field),
            field: field.to_string(),
            message,
        };
        let n = self.n;
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version '{}', expected '{CONFIG_SCHEMA_VERSION}'", self.schema_version),
            ));
        }
        if n == 0 {
            return Err(invalid("n", "dimension must be at least 1".into()));
        }
        match self.family {
            FamilyKind::Sign if !(n >= 2 && n.is_power_of_two()) => {
                return Err(invalid("n", format!("sign family needs n = 2^m with m ≥ 1, got {n}")));
            }
            FamilyKind::Bell if n < 2 => {
                return Err(invalid("n", "bell family needs n ≥ 2".into()));
            }
            FamilyKind::Bell if self.lambda.is_some() => {
                return Err(invalid("lambda", "the bell family uses the fixed resource Σ|jj⟩/√n".into()));
            }
            FamilyKind::Custom if self.custom_xi.as_ref().is_none_or(Vec::is_empty) => {
                return Err(invalid("custom_xi", "family \"custom\" requires a nonempty custom_xi".into()));
            }
            _ => {}
        }
        if self.family != FamilyKind::Custom && self.custom_xi.is_some() {
            return Err(invalid("custom_xi", "only allowed with family \"custom\"".into()));
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(invalid("tolerance", format!("must be a positive real, got {tol}")));
            }
        }
        let square = |field: &str, rows: &MatrixRows| -> Result<CMatrix, ConfigError> {
            let m = matrix_from_rows(rows).map_err(|msg| invalid(field, msg))?;
            if m.rows() != n || m.cols() != n {
                return Err(invalid(field, format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols())));
            }
            Ok(m)
        };
        match &self.lambda {
            Some(LambdaSpec::Named(name)) if name != "identity" => {
                return Err(invalid("lambda", format!("unknown lambda '{name}' (expected \"identity\")")));
            }
            Some(LambdaSpec::Matrix(rows)) => {
                let m = square("lambda", rows)?;
                if m.frobenius_norm() == 0.0 {
                    return Err(invalid("lambda", "coefficient matrix is identically zero".into()));
                }
            }
            _ => {}
        }
        if let RhoSpec::Matrix(rows) = &self.rho {
            let m = square("rho", rows)?;
            teleport_core::states::DensityOperator::from_matrix(m)
                .map_err(|e| invalid("rho", e.to_string()))?;
        }
        if let Some(xis) = &self.custom_xi {
            let mut seen = std::collections::BTreeSet::new();
            for xi in xis {
                if !seen.insert(xi.label.as_str()) {
                    return Err(invalid("custom_xi", format!("duplicate label '{}'", xi.label)));
                }
                let t = square("custom_xi", &xi.coefficients)?;
                teleport_core::states::MeasurementVector::new(t, xi.label.clone())
                    .map_err(|e| invalid("custom_xi", format!("'{}': {e}", xi.label)))?;
            }
        }
        Ok(())
    }
}
