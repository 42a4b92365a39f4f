//! JSON run configuration: typed sections with unknown keys rejected, plus
//! dotted-path `--key=value` overrides applied to the document before
//! deserialization.

use num_complex::Complex64;
use semikit_core::expr::Expression;
use semikit_core::grid::{GridFunction, SpatialGrid};
use serde::Deserialize;
use serde_json::Value;
use std::fmt;

/// Failures split by exit code: config errors are caller mistakes (exit 1),
/// numerical errors are contract violations discovered while computing
/// (exit 2).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional echo of the subcommand; verified against the one invoked.
    pub command: Option<String>,
    pub grid: Option<GridSection>,
    pub coefficients: Option<CoefficientsSection>,
    pub potential: Option<FunctionSpec>,
    pub scheme: Option<SchemeSection>,
    pub initial: Option<FunctionSpec>,
    pub time: Option<TimeSection>,
    pub ns: Option<Vec<usize>>,
    pub ts: Option<Vec<f64>>,
    pub lambda: Option<LambdaSpec>,
    pub rhs: Option<FunctionSpec>,
    pub quadrature: Option<QuadratureSection>,
    pub scalar: Option<ScalarSection>,
    pub norm: Option<String>,
    pub tolerances: Option<TolerancesSection>,
    pub weight: Option<f64>,
    pub oracle: Option<String>,
    pub output_dir: Option<String>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub x0: f64,
    pub period: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    pub a: Option<FunctionSpec>,
    pub b: Option<FunctionSpec>,
    pub c: Option<FunctionSpec>,
}

/// A scalar field given either as an expression in x or as literal samples.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Expression(String),
    Samples { samples: Vec<f64> },
}

impl FunctionSpec {
    pub fn realize(&self, grid: SpatialGrid, field: &str) -> CliResult<GridFunction> {
        match self {
            FunctionSpec::Expression(src) => {
                let expr = Expression::parse(src)
                    .map_err(|e| config_err(format!("{field}: {e}")))?;
                GridFunction::sample_real(grid, |x| expr.eval(x))
                    .map_err(|e| config_err(format!("{field}: {e}")))
            }
            FunctionSpec::Samples { samples } => {
                let complex: Vec<Complex64> =
                    samples.iter().map(|&v| Complex64::from(v)).collect();
                GridFunction::new(grid, complex)
                    .map_err(|e| config_err(format!("{field}: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: Option<String>,
    pub hermite_order: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t: f64,
    pub n: Option<usize>,
}

/// lambda as an {re, im} object or a compact "re,im" string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Compact(String),
}

impl LambdaSpec {
    pub fn value(&self) -> CliResult<Complex64> {
        match self {
            LambdaSpec::Parts { re, im } => Ok(Complex64::new(*re, *im)),
            LambdaSpec::Compact(text) => {
                let parts: Vec<&str> = text.split(',').collect();
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| config_err(format!("lambda: invalid number '{s}'")))
                };
                match parts.as_slice() {
                    [re] => Ok(Complex64::new(parse(re)?, 0.0)),
                    [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
                    _ => Err(config_err(format!("lambda: expected 're,im', got '{text}'"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub t_max: Option<f64>,
    pub panels: Option<usize>,
    pub nodes_per_panel: Option<usize>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarSection {
    pub l: f64,
    pub t: f64,
    pub ns: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSection {
    pub series: Option<f64>,
    pub norm_drift: Option<f64>,
}

/// Parse the raw document, apply `key=value` overrides along dotted paths,
/// and deserialize with unknown-key rejection. Returns the typed config and
/// the resolved document (recorded verbatim in summary.json).
pub fn load_config(text: &str, overrides: &[String]) -> CliResult<(RunConfig, Value)> {
    let mut doc: Value = serde_json::from_str(text)
        .map_err(|e| config_err(format!("malformed JSON: {e}")))?;
    if !doc.is_object() {
        return Err(config_err("config document must be a JSON object"));
    }
    for item in overrides {
        apply_override(&mut doc, item)?;
    }
    let config: RunConfig = serde_json::from_value(doc.clone())
        .map_err(|e| config_err(e.to_string()))?;
    Ok((config, doc))
}

fn apply_override(doc: &mut Value, item: &str) -> CliResult<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| config_err(format!("override '{item}' is not key=value")))?;
    if path.is_empty() {
        return Err(config_err(format!("override '{item}' has an empty key")));
    }
    // a value that parses as JSON keeps its type; anything else is a string
    let value: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let mut cursor = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(config_err(format!("override '{item}' has an empty path segment")));
        }
        let map = cursor
            .as_object_mut()
            .ok_or_else(|| config_err(format!("override '{path}': '{segment}' is not an object")))?;
        if i + 1 == segments.len() {
            map.insert(segment.to_string(), value);
            return Ok(());
        }
        cursor = map
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("segments is nonempty");
}

/// Best-effort read of output_dir from an arbitrary document so summary.json
/// lands in the right place even when typed parsing fails.
pub fn peek_output_dir(text: &str) -> Option<String> {
    let doc: Value = serde_json::from_str(text).ok()?;
    doc.get("output_dir")?.as_str().map(str::to_string)
}

impl RunConfig {
    pub fn build_grid(&self) -> CliResult<SpatialGrid> {
        let section = self
            .grid
            .as_ref()
            .ok_or_else(|| config_err("grid: section is required"))?;
        SpatialGrid::new(section.x0, section.period, section.n_points).map_err(|e| {
            let field = match e {
                semikit_core::Error::InvalidPeriod(_) => "grid.period",
                semikit_core::Error::TooFewPoints(_) => "grid.n_points",
                semikit_core::Error::InvalidOrigin(_) => "grid.x0",
                _ => "grid",
            };
            config_err(format!("{field}: {e}"))
        })
    }

    pub fn series_tolerance(&self) -> f64 {
        self.tolerances
            .as_ref()
            .and_then(|t| t.series)
            .unwrap_or(1e-12)
    }

    pub fn norm_drift_tolerance(&self) -> f64 {
        self.tolerances
            .as_ref()
            .and_then(|t| t.norm_drift)
            .unwrap_or(1e-6)
    }
}
