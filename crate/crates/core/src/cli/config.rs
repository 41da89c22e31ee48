//! Run configuration: JSON file plus dotted `key=value` overrides.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::calculus::PotentialH;
use crate::error::{Error, Result};
use crate::graph::{generate_standard, load_graph, GeneratorParams, GraphKind, WeightedGraph};
use crate::kernel::{KernelMethod, QuadratureConfig};
use crate::schrodinger::{Branch, Nonlinearity, NonlinearitySpec, SolverConfig, DEFAULT_PATH_NODES};

/// Either a graph file or a generator with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GraphKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl GraphSpec {
    pub fn params(&self) -> GeneratorParams {
        GeneratorParams {
            n: self.n,
            radius: self.radius,
            mu: self.mu,
            w: self.w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSpec {
    pub a: f64,
    pub b: f64,
    pub center: String,
}

/// Exactly one of `constant`, `file` (JSON map id → value) or `ramp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampSpec>,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec {
            constant: Some(1.0),
            file: None,
            ramp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SValues {
    One(f64),
    Many(Vec<f64>),
}

impl SValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SValues::One(s) => vec![*s],
            SValues::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelOptions {
    pub method: KernelMethod,
    /// Also build the kernel by the other method and report the deviation.
    pub compare: bool,
    pub compare_tol: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            method: KernelMethod::Spectral,
            compare: false,
            compare_tol: 1e-6,
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    GroundState,
    MountainPass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub path_nodes: usize,
    /// Restricts the run to one branch; both by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: SolveMethod::GroundState,
            path_nodes: DEFAULT_PATH_NODES,
            branch: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub identity_tol: f64,
    pub mass_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: 100,
            seed: 0,
            identity_tol: 1e-11,
            mass_tol: 1e-10,
        }
    }
}

fn default_nonlinearity() -> NonlinearitySpec {
    NonlinearitySpec::Name("cubic".into())
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub s: SValues,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default = "default_nonlinearity")]
    pub nonlinearity: NonlinearitySpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub kernel: KernelOptions,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub check: CheckOptions,
    /// Directory against which relative input paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Sets `path = value` in a JSON object tree, creating objects on the way.
fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Schema(format!("malformed override key `{key}`")));
    }
    for part in &parts[..parts.len() - 1] {
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::Schema(format!("override `{key}` descends into a non-object")))?;
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let map = node
        .as_object_mut()
        .ok_or_else(|| Error::Schema(format!("override `{key}` descends into a non-object")))?;
    map.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Applies `key=value` overrides; values parse as JSON and fall back to
/// plain strings.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<()> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Schema(format!("override `{item}` is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_dotted(root, key.trim(), value)?;
    }
    Ok(())
}

fn schema_error(err: serde_json::Error) -> Error {
    Error::Schema(err.to_string())
}

impl RunConfig {
    /// Parses configuration text, applies overrides and checks ranges.
    pub fn from_text(text: &str, overrides: &[String], base_dir: &Path) -> Result<Self> {
        let mut root: Value = serde_json::from_str(text).map_err(|e| Error::from_json(&e))?;
        if !root.is_object() {
            return Err(Error::Schema("configuration must be a JSON object".into()));
        }
        apply_overrides(&mut root, overrides)?;
        let mut cfg: RunConfig = serde_json::from_value(root).map_err(schema_error)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.graph.file, &self.graph.generator) {
            (Some(_), None) if self.graph.params() == GeneratorParams::default() => {}
            (Some(_), _) => {
                return Err(Error::Schema(
                    "graph takes either `file` or `generator` with parameters, not both".into(),
                ))
            }
            (None, None) => return Err(Error::Schema("graph needs `file` or `generator`".into())),
            (None, Some(_)) => {}
        }
        let s = self.s.values();
        if s.is_empty() {
            return Err(Error::Range("s must contain at least one value".into()));
        }
        if let Some(bad) = s.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Range(format!("s = {bad} is outside (0, 1)")));
        }
        let p = &self.potential;
        let chosen = p.constant.is_some() as u8 + p.file.is_some() as u8 + p.ramp.is_some() as u8;
        if chosen != 1 {
            return Err(Error::Schema(
                "potential needs exactly one of `constant`, `file`, `ramp`".into(),
            ));
        }
        if let Some(c) = p.constant {
            if !(c > 0.0) {
                return Err(Error::Range(format!("potential h0 = {c} is not positive")));
            }
        }
        if let Some(r) = &p.ramp {
            if !(r.a > 0.0 && r.b >= 0.0) {
                return Err(Error::Range(format!(
                    "ramp needs a > 0 and b >= 0, got a = {}, b = {}",
                    r.a, r.b
                )));
            }
        }
        self.solver
            .validate()
            .map_err(|e| Error::Range(e.to_string()))?;
        if self.solve.path_nodes < 3 {
            return Err(Error::Range("solve.path_nodes must be at least 3".into()));
        }
        self.nonlinearity.build()?;
        Ok(())
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.s.values()
    }

    pub fn build_graph(&self) -> Result<WeightedGraph> {
        match (&self.graph.file, self.graph.generator) {
            (Some(file), _) => load_graph(self.resolve(file)),
            (None, Some(kind)) => generate_standard(kind, &self.graph.params()),
            (None, None) => Err(Error::Schema("graph needs `file` or `generator`".into())),
        }
    }

    /// Materializes `h` on the graph; `h0 ≤ 0` is a range error.
    pub fn build_potential(&self, g: &WeightedGraph) -> Result<PotentialH> {
        let p = &self.potential;
        let result = if let Some(c) = p.constant {
            PotentialH::constant(g.len(), c)
        } else if let Some(file) = &p.file {
            let path = self.resolve(file);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let map: HashMap<String, f64> =
                serde_json::from_str(&text).map_err(|e| Error::from_json(&e))?;
            PotentialH::new(g.function_from_map(&map)?)
        } else if let Some(r) = &p.ramp {
            PotentialH::ramp(g, r.a, r.b, &r.center)
        } else {
            return Err(Error::Schema("potential is empty".into()));
        };
        result.map_err(|e| match e {
            Error::NonPositivePotential(h0) => {
                Error::Range(format!("potential h0 = {h0} is not positive"))
            }
            other => other,
        })
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity> {
        self.nonlinearity.build()
    }

    /// Deterministic pretty JSON of the effective configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

/// Reads a configuration file; relative input paths resolve against its
/// directory.
pub fn parse_config(path: impl AsRef<Path>, overrides: &[String]) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    RunConfig::from_text(&text, overrides, &base)
}
