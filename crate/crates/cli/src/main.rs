use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use orbitlab_cli::{run, ExperimentConfig, RunError};

/// Run one orbitlab experiment from a JSON config.
#[derive(Debug, Parser)]
#[command(name = "orbitlab", version)]
struct Args {
    /// Path to the experiment config (JSON).
    config: PathBuf,
    /// Directory for report.json and table.csv; ORBITLAB_OUT takes precedence.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("orbitlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<bool, RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Config(format!("{}: {e}", args.config.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let out_dir = std::env::var_os("ORBITLAB_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| args.out_dir.clone());
    let outcome = run(&cfg, &out_dir)?;
    if args.verbose {
        eprintln!(
            "{:?}{}: {:?}, {} table rows -> {}",
            cfg.command,
            cfg.preset
                .map(|p| format!(" {}", p.name()))
                .unwrap_or_default(),
            outcome.report.verdict,
            outcome.table.rows.len(),
            out_dir.display()
        );
    }
    Ok(outcome.passed())
}
