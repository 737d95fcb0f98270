//! Experiment runner: parses a JSON config, runs one experiment and writes CSV
//! tables, SVG plots and a JSON summary.

pub mod config;
pub mod error;
mod experiments;
pub mod report;
pub mod table;

use std::time::Instant;

use sha2::{Digest, Sha256};

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use report::{emit_report, Summary};
pub use table::{Check, PlotRequest, ResultTable, RunMeta, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything one run produced, before anything is written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub tables: Vec<ResultTable>,
    pub plots: Vec<PlotRequest>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
}

/// SHA-256 of the canonical serialization of the config.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let digest = Sha256::digest(config.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs the configured experiment with `jobs` worker threads (0 picks the
/// number of cores). Rows are independent, so the output does not depend on
/// `jobs`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let outcome = pool.install(|| experiments::dispatch(config))?;
    let meta = RunMeta {
        config_hash: config_hash(config),
        tool_version: TOOL_VERSION.into(),
        seed: config.seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let mut tables = outcome.tables;
    for t in &mut tables {
        t.meta = meta.clone();
    }
    let passed = outcome.checks.iter().all(|c| c.passed);
    let summary = Summary {
        experiment: config.experiment.name().into(),
        meta,
        passed,
        checks: outcome.checks,
        row_errors: outcome.row_errors,
        tables: Vec::new(),
        plots: Vec::new(),
    };
    Ok(RunOutput {
        tables,
        plots: if config.output.plots {
            outcome.plots
        } else {
            Vec::new()
        },
        summary,
    })
}
