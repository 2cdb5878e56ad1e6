//! Configuration-driven experiment runner behind the `nsp` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use config::{Experiment, RunConfig};
pub use error::{CliError, Result};

/// Command-line request before the config file is read.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// Fully resolved configuration; `nsp <experiment> --config manifest.json`
    /// reruns it.
    pub config: RunConfig,
    pub outputs: Vec<String>,
    pub all_pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub all_pass: bool,
    pub out_dir: PathBuf,
    pub failed: Vec<String>,
}

pub fn build_config(inv: &Invocation) -> Result<config::Resolved> {
    let mut tree = match &inv.config {
        Some(p) => config::load_tree(p)?,
        None => config::default_tree(inv.experiment),
    };
    let map = tree.as_object_mut().expect("checked on load");
    map.entry("experiment")
        .or_insert_with(|| Value::String(inv.experiment.name().into()));
    // `data.*` overrides refine the default recipe rather than replace it
    if !map.contains_key("data") {
        map.insert("data".into(), serde_json::to_value(config::DataSpec::default())?);
    }
    for o in &inv.overrides {
        config::apply_override(&mut tree, o)?;
    }
    let map = tree.as_object_mut().expect("still a table");
    match map.get("experiment") {
        Some(Value::String(s)) if s == inv.experiment.name() => {}
        other => {
            return Err(CliError::config(
                "experiment",
                format!("config names {} but the command is {}", other.unwrap_or(&Value::Null), inv.experiment.name()),
            ))
        }
    }
    if let Some(seed) = inv.seed {
        map.insert("seed".into(), Value::from(seed));
    }
    if let Some(out) = &inv.out {
        map.insert("output_dir".into(), Value::String(out.display().to_string()));
    }
    config::from_tree(tree)?.resolve()
}

fn relative(out: &Path, p: &Path) -> String {
    p.strip_prefix(out).unwrap_or(p).display().to_string()
}

/// Runs the experiment and writes every artifact under the output directory.
pub fn run(inv: &Invocation) -> Result<RunSummary> {
    let resolved = build_config(inv)?;
    let cfg = &resolved.config;
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| CliError::config("output_dir", format!("{}: {e}", out.display())))?;

    let art = experiments::execute(&resolved)?;
    let mut outputs = Vec::new();
    for (name, table) in &art.tables {
        let path = out.join(name);
        output::write_csv(&path, table)?;
        outputs.push(relative(&out, &path));
        if cfg.plotdata {
            let stem = name.trim_end_matches(".csv");
            for p in output::write_plotdata(&out.join("plotdata").join(stem), table)? {
                outputs.push(relative(&out, &p));
            }
        }
    }
    for (name, rows) in &art.text_tables {
        let path = out.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        outputs.push(relative(&out, &path));
    }
    let fits = art.fits(cfg.experiment);
    output::write_json(&out.join("fits.json"), &fits)?;
    outputs.push("fits.json".into());
    outputs.push("manifest.json".into());

    let manifest = Manifest {
        tool: "nsp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.experiment.name().into(),
        config: cfg.clone(),
        outputs,
        all_pass: fits.all_pass,
    };
    output::write_json(&out.join("manifest.json"), &manifest)?;
    Ok(RunSummary {
        all_pass: fits.all_pass,
        out_dir: out,
        failed: fits
            .verdicts
            .iter()
            .filter(|v| v.pass == Some(false))
            .map(|v| v.name.clone())
            .collect(),
    })
}
