//! Runs every shipped acceptance config and prints one PASS/FAIL line per
//! criterion. Exits non-zero if any criterion fails.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use specgeo::{run_experiment, ExperimentConfig};

struct Criterion {
    id: u32,
    title: &'static str,
    configs: &'static [&'static str],
    budget: Option<Duration>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "torus critical length 4*pi*k and sqrt(lambda) scaling",
        configs: &["c01-critical-torus"],
        budget: Some(Duration::from_secs(120)),
    },
    Criterion {
        id: 2,
        title: "zonal critical latitudes, lengths and linear slope",
        configs: &["c02-critical-zonal"],
        budget: None,
    },
    Criterion {
        id: 3,
        title: "nodal length scaling on both families",
        configs: &["c03-nodal"],
        budget: None,
    },
    Criterion {
        id: 4,
        title: "doubling index envelope, L2 and sup",
        configs: &["c04-doubling"],
        budget: Some(Duration::from_secs(300)),
    },
    Criterion {
        id: 5,
        title: "three-sphere constant in both orientations",
        configs: &["c05-three-sphere"],
        budget: None,
    },
    Criterion {
        id: 6,
        title: "Carleman estimate with the recorded constant",
        configs: &["c06-carleman"],
        budget: Some(Duration::from_secs(300)),
    },
    Criterion {
        id: 7,
        title: "weight admissibility and exact values",
        configs: &["c07-weight"],
        budget: None,
    },
    Criterion {
        id: 8,
        title: "elliptic gradient estimate constant",
        configs: &["c08-elliptic"],
        budget: None,
    },
    Criterion {
        id: 9,
        title: "lower-bound constants per radius",
        configs: &["c09-lower-bound"],
        budget: None,
    },
    Criterion {
        id: 10,
        title: "growth exponent, Taylor constant and measure/growth ratio",
        configs: &["c10-growth", "c10-df-check"],
        budget: None,
    },
    Criterion {
        id: 11,
        title: "residuals, finite-difference consistency, spectrum agreement",
        configs: &["c11-spectrum"],
        budget: None,
    },
];

fn run_criterion(c: &Criterion) -> (bool, Vec<String>, Duration) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/acceptance");
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for name in c.configs {
        let path = format!("{dir}/{name}.json");
        let result = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| ExperimentConfig::from_json(&t).map_err(|e| e.to_string()))
            .and_then(|cfg| run_experiment(&cfg, 0).map_err(|e| e.to_string()));
        match result {
            Ok(out) => {
                ok &= out.passed() && !out.summary.checks.is_empty();
                for check in &out.summary.checks {
                    let tag = if check.passed { "ok" } else { "FAILED" };
                    lines.push(format!("    [{tag}] {}: {}", check.name, check.detail));
                }
                for e in &out.summary.row_errors {
                    lines.push(format!("    [row error] {e}"));
                }
            }
            Err(e) => {
                ok = false;
                lines.push(format!("    [error] {name}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if let Some(b) = c.budget {
        let within = elapsed <= b;
        ok &= within;
        lines.push(format!(
            "    [{}] runtime {:.1} s within {} s",
            if within { "ok" } else { "FAILED" },
            elapsed.as_secs_f64(),
            b.as_secs()
        ));
    }
    (ok, lines, elapsed)
}

fn main() -> ExitCode {
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for c in CRITERIA {
        if !filter.is_empty() && !filter.contains(&c.id) {
            continue;
        }
        let (ok, lines, elapsed) = run_criterion(c);
        println!(
            "criterion {:>2}: {} ({}, {:.1} s)",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.title,
            elapsed.as_secs_f64()
        );
        for l in lines {
            println!("{l}");
        }
        if !ok {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
