//! Config-driven front end for `martin-core`: one task per run, one CSV table and one
//! JSON manifest per task.

pub mod config;
pub mod emit;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

pub use config::{RunConfig, Task};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "MARTIN_OUT_DIR";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Compute(_) => "compute",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable error record.
    pub fn record(&self, task: Option<Task>) -> Value {
        let message = match self {
            CliError::Config(m) | CliError::Compute(m) | CliError::Io(m) => m.clone(),
        };
        json!({
            "status": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "task": task.map(|t| t.name()),
            "message": message,
        })
    }
}

/// Paths written by a successful run.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
}

/// Output directory: explicit flag, then the environment override, then the config.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV) {
        return PathBuf::from(p);
    }
    cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

/// Run the configured task and write `<stem>.csv` and `<stem>.json` into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Artifacts, CliError> {
    let task = cfg.task.ok_or_else(|| CliError::Config("no task given".into()))?;
    if !cfg.tolerances.tol.is_finite() || cfg.tolerances.tol <= 0.0 {
        return Err(CliError::Config("tolerances.tol must be positive".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {}", out_dir.display(), e)))?;
    let stem = cfg.stem();
    let start = Instant::now();
    let result = tasks::run_task(task, cfg);
    let elapsed = start.elapsed().as_secs_f64();
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            if !matches!(e, CliError::Config(_)) {
                emit::write_json(&out_dir.join(format!("{}.error.json", stem)), &e.record(Some(task)))?;
            }
            return Err(e);
        }
    };
    let csv = out_dir.join(format!("{}.csv", stem));
    let manifest = out_dir.join(format!("{}.json", stem));
    outcome.table.write_csv(&csv)?;
    let config = serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    let doc = json!({
        "status": "ok",
        "task": task.name(),
        "config": config,
        "library": { "name": "martin-core", "version": martin_core::VERSION },
        "cli_version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "tolerances": { "tol": cfg.tolerances.tol },
        "columns": outcome.table.columns,
        "rows": outcome.table.rows.len(),
        "max_error": match outcome.max_err { Some(e) => json!(e), None => json!(emit::EXACT) },
        "exact_values": outcome.exact,
        "extra": outcome.extra,
        "csv": csv.file_name().map(|f| f.to_string_lossy().into_owned()),
        "wall_clock_seconds": elapsed,
    });
    emit::write_json(&manifest, &doc)?;
    Ok(Artifacts { csv, manifest, rows: outcome.table.rows.len() })
}
