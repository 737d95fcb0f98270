use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use specgeo::{emit_report, run_experiment, CliError, ExperimentConfig};

/// Run a numerical experiment on eigenfunctions of model surfaces.
#[derive(Parser, Debug)]
#[command(name = "specgeo", version)]
struct Args {
    /// Experiment kind; must match the `experiment.kind` of the config.
    experiment: String,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Ok(seed) = std::env::var("SPECGEO_SEED") {
        config.seed = seed.trim().parse().map_err(|_| {
            CliError::invalid("SPECGEO_SEED", format!("not an unsigned integer: {seed:?}"))
        })?;
    }
    if config.experiment.name() != args.experiment {
        return Err(CliError::ExperimentMismatch {
            requested: args.experiment.clone(),
            configured: config.experiment.name().into(),
        });
    }
    let mut output = run_experiment(&config, args.jobs)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let written = emit_report(
        &dir,
        &args.experiment,
        &output.tables,
        &output.plots,
        &mut output.summary,
    )?;
    for c in &output.summary.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    for e in &output.summary.row_errors {
        eprintln!("row error: {e}");
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(output.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
