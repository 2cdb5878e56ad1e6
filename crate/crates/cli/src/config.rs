//! Run configuration. Files are TOML (or the JSON manifest of an earlier
//! run); `--override key=value` edits the parsed tree before it is typed.

use std::path::{Path, PathBuf};

use nsp_core::decay::{DataClass, DEFAULT_TOL};
use nsp_core::{Grid, IntegratorConfig, PhysParams, Recipe, Scheme, Window};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    HeatDemo,
    LinearDecay,
    GreenBounds,
    Simulate,
    LemmaSuite,
    SymbolScan,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::HeatDemo => "heat-demo",
            Experiment::LinearDecay => "linear-decay",
            Experiment::GreenBounds => "green-bounds",
            Experiment::Simulate => "simulate",
            Experiment::LemmaSuite => "lemma-suite",
            Experiment::SymbolScan => "symbol-scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: Option<usize>,
    pub length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    #[serde(flatten)]
    pub recipe: Recipe,
    /// `sqrt(E_0^3(0))` of box data.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            recipe: Recipe::GaussianGrad { s: Some(0.5) },
            amplitude: default_amplitude(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub scheme: Option<Scheme>,
    pub dt: Option<f64>,
    /// Defaults to the validity horizon of the box.
    pub t_end: Option<f64>,
    pub output_stride: Option<usize>,
    pub safety: Option<f64>,
    pub checkpoint_dir: Option<PathBuf>,
}

fn default_amplitude() -> f64 {
    1e-2
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_n_max() -> u32 {
    3
}
fn default_samples() -> usize {
    40
}
fn default_ensemble() -> usize {
    32
}
fn default_true() -> bool {
    true
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("nsp-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub params: PhysParams,
    #[serde(default)]
    pub grid: GridSpec,
    /// Negative Sobolev indices of the data.
    #[serde(default)]
    pub s_list: Vec<f64>,
    /// Lebesgue exponents of the data.
    #[serde(default)]
    pub p_list: Vec<f64>,
    /// Derivative orders.
    #[serde(default)]
    pub ell_list: Vec<u32>,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Highest derivative order in the energy functionals.
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    /// Points per time or wavenumber grid.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Lemma ensemble size before doubling.
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// `false` switches the nonlinear terms off in `simulate`.
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub plotdata: bool,
}

/// Reads a TOML config, or a JSON file whose `config` entry is one.
pub fn load_tree(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    let tree: Value = if is_json {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::config(&path.display().to_string(), e))?;
        match v {
            Value::Object(mut m) if m.contains_key("config") => m.remove("config").expect("present"),
            other => other,
        }
    } else {
        let t: toml::Table = toml::from_str(&text).map_err(|e| CliError::config(&path.display().to_string(), e))?;
        serde_json::to_value(t)?
    };
    if !tree.is_object() {
        return Err(CliError::config(&path.display().to_string(), "top level must be a table"));
    }
    Ok(tree)
}

/// Tree of a config that only names the experiment.
pub fn default_tree(experiment: Experiment) -> Value {
    serde_json::json!({ "schema_version": SCHEMA_VERSION, "experiment": experiment.name() })
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `key.path=value`; missing intermediate tables are created.
pub fn apply_override(tree: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config("--override", format!("`{spec}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::config("--override", format!("bad key `{key}`")));
    }
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = tree;
    for part in &parts[..parts.len() - 1] {
        let map = node
            .as_object_mut()
            .ok_or_else(|| CliError::config(key, "parent is not a table"))?;
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    node.as_object_mut()
        .ok_or_else(|| CliError::config(key, "parent is not a table"))?
        .insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

/// Types the tree; errors carry the path of the offending field.
pub fn from_tree(tree: Value) -> Result<RunConfig> {
    serde_path_to_error::deserialize(tree).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(if path == "." { "config" } else { &path }, e.into_inner())
    })
}

/// Fully resolved configuration plus derived objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub grid: Option<Grid>,
    pub integrator: Option<IntegratorConfig>,
    pub classes: Vec<DataClass>,
}

impl RunConfig {
    /// Fills experiment defaults and validates every field.
    pub fn resolve(mut self) -> Result<Resolved> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("{} unsupported, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.params.validate().map_err(|e| CliError::config("params", e))?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::config("tol", format!("{} must be positive", self.tol)));
        }
        if self.samples < nsp_core::decay::MIN_SAMPLES {
            return Err(CliError::config(
                "samples",
                format!("{} below the minimum {}", self.samples, nsp_core::decay::MIN_SAMPLES),
            ));
        }
        if let Some(w) = self.window {
            Window::new(w.t_lo, w.t_hi).map_err(|e| CliError::config("window", e))?;
        }
        if self.ell_list.iter().any(|&l| l > 8) {
            return Err(CliError::config("ell_list", "orders above 8 are not supported"));
        }
        let (s_default, ell_default): (&[f64], &[u32]) = match self.experiment {
            Experiment::HeatDemo => (&[0.5], &[1]),
            Experiment::LinearDecay if self.p_list.is_empty() => (&[0.5, 1.0], &[0, 1]),
            Experiment::LinearDecay => (&[], &[0, 1]),
            Experiment::Simulate => (&[0.5], &[0]),
            _ => (&[], &[]),
        };
        if self.s_list.is_empty() {
            self.s_list = s_default.to_vec();
        }
        if self.ell_list.is_empty() {
            self.ell_list = ell_default.to_vec();
        }
        let mut classes = Vec::new();
        for (i, &s) in self.s_list.iter().enumerate() {
            let c = DataClass::NegativeSobolev(s);
            c.s_index().map_err(|e| CliError::config(&format!("s_list[{i}]"), e))?;
            classes.push(c);
        }
        for (i, &p) in self.p_list.iter().enumerate() {
            let c = DataClass::Lebesgue(p);
            c.s_index().map_err(|e| CliError::config(&format!("p_list[{i}]"), e))?;
            classes.push(c);
        }
        if !(self.data.amplitude >= 0.0 && self.data.amplitude.is_finite()) {
            return Err(CliError::config("data.amplitude", "must be finite and >= 0"));
        }

        let (grid, integrator) = match self.experiment {
            Experiment::Simulate => {
                let n = *self.grid.n.get_or_insert(32);
                let length = *self.grid.length.get_or_insert(16.0 * std::f64::consts::PI);
                let grid = Grid::new(n, length).map_err(|e| CliError::config("grid", e))?;
                let spec = &mut self.integrator;
                let cfg = IntegratorConfig {
                    scheme: *spec.scheme.get_or_insert(Scheme::EtdRk4),
                    dt: *spec.dt.get_or_insert(0.25),
                    t_end: *spec.t_end.get_or_insert(grid.t_max()),
                    output_stride: *spec.output_stride.get_or_insert(4),
                    safety: *spec.safety.get_or_insert(1.0),
                    checkpoint_dir: Some(
                        spec.checkpoint_dir
                            .get_or_insert_with(|| self.output_dir.join("checkpoint"))
                            .clone(),
                    ),
                };
                cfg.validate().map_err(|e| CliError::config("integrator", e))?;
                if let Some(&s) = self.s_list.iter().find(|&&s| !(0.0..1.5).contains(&s)) {
                    return Err(CliError::config("s_list", format!("{s} outside [0, 3/2)")));
                }
                nsp_core::EnergyRequest::new(self.n_max, self.s_list.clone(), vec![(0, self.n_max)], 0.0)
                    .map_err(|e| CliError::config("n_max", e))?;
                (Some(grid), Some(cfg))
            }
            Experiment::LemmaSuite => {
                let n = *self.grid.n.get_or_insert(32);
                let length = *self.grid.length.get_or_insert(2.0 * std::f64::consts::PI);
                nsp_core::FieldEnsemble::with_shape(self.ensemble, 2.0, self.seed, n, length)
                    .map_err(|e| CliError::config("grid", e))?;
                (Some(Grid::new(n, length).map_err(|e| CliError::config("grid", e))?), None)
            }
            _ => (None, None),
        };
        Ok(Resolved {
            config: self,
            grid,
            integrator,
            classes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_tables_and_parse_values() {
        let mut t = default_tree(Experiment::Simulate);
        apply_override(&mut t, "params.mu=0.5").unwrap();
        apply_override(&mut t, "data.recipe=random").unwrap();
        apply_override(&mut t, "data.seed=4").unwrap();
        apply_override(&mut t, "data.slope=2.0").unwrap();
        apply_override(&mut t, "s_list=[0.25, 1.0]").unwrap();
        let c = from_tree(t).unwrap();
        assert_eq!(c.params.mu, 0.5);
        assert_eq!(c.data.recipe, Recipe::Random { seed: 4, slope: 2.0 });
        assert_eq!(c.s_list, vec![0.25, 1.0]);
    }

    #[test]
    fn errors_name_the_field() {
        let mut t = default_tree(Experiment::HeatDemo);
        apply_override(&mut t, "params.mu=\"fast\"").unwrap();
        let msg = from_tree(t).unwrap_err().to_string();
        assert!(msg.contains("params.mu"), "{msg}");

        let mut t = default_tree(Experiment::HeatDemo);
        apply_override(&mut t, "s_list=[2.0]").unwrap();
        let msg = from_tree(t).unwrap().resolve().unwrap_err().to_string();
        assert!(msg.contains("s_list[0]"), "{msg}");

        assert!(apply_override(&mut default_tree(Experiment::HeatDemo), "novalue").is_err());
    }

    #[test]
    fn simulate_defaults_resolve() {
        let r = from_tree(default_tree(Experiment::Simulate)).unwrap().resolve().unwrap();
        let g = r.grid.unwrap();
        let cfg = r.integrator.unwrap();
        assert_eq!(g.n(), 32);
        assert_eq!(cfg.t_end, g.t_max());
        assert_eq!(r.config.integrator.t_end, Some(g.t_max()));
    }

    #[test]
    fn schema_version_is_checked() {
        let mut t = default_tree(Experiment::HeatDemo);
        apply_override(&mut t, "schema_version=2").unwrap();
        assert!(from_tree(t).unwrap().resolve().is_err());
        let mut t = default_tree(Experiment::HeatDemo);
        t.as_object_mut().unwrap().remove("schema_version");
        assert!(from_tree(t).unwrap_err().to_string().contains("schema_version"));
    }
}
