use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use martin_cli::{resolve_out_dir, run, CliError, RunConfig, Task};

#[derive(Parser, Debug)]
#[command(name = "martin", version, about = "Tabulate root data, spherical functions, Green and Martin kernels and boundary measures")]
struct Args {
    /// Task to run
    #[arg(value_enum)]
    task: Task,
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides MARTIN_OUT_DIR and the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for generic evaluation points (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Series tolerance (overrides the config)
    #[arg(long)]
    tol: Option<f64>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    match cfg.task {
        Some(t) if t != args.task => {
            return Err(CliError::Config(format!("config task `{}` does not match `{}`", t, args.task)));
        }
        _ => cfg.task = Some(args.task),
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.tol {
        cfg.tolerances.tol = t;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| {
        let dir = resolve_out_dir(args.out.as_deref(), &cfg);
        run(&cfg, &dir)
    });
    match result {
        Ok(a) => {
            let line = serde_json::json!({
                "status": "ok",
                "csv": a.csv.display().to_string(),
                "manifest": a.manifest.display().to_string(),
                "rows": a.rows,
            });
            println!("{}", line);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record(Some(args.task)));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
