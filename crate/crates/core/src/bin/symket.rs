//! `symket` scenario runner.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for an
//! invalid configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use symket::scenario::{
    run_scenario, write_atomic, ConfigError, ConfigLayer, OutputFormat, ScenarioKind, WellSpec,
};
use symket::ParticleStatistics;

const SEED_ENV: &str = "SYMKET_SEED";

#[derive(Debug, Parser)]
#[command(name = "symket", version, about = "Run a symmetrized-state scenario and emit a JSON report")]
#[command(allow_negative_numbers = true)]
struct Args {
    /// Scenario to run (no-cloning, wrong-clone, photon-pair, densities, disjoint-wells).
    #[arg(value_name = "SCENARIO")]
    positional: Option<ScenarioKind>,

    /// Scenario to run; takes precedence over the positional argument.
    #[arg(long)]
    scenario: Option<ScenarioKind>,

    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    a: Option<f64>,

    #[arg(long)]
    b: Option<f64>,

    #[arg(long, value_name = "boson|fermion")]
    statistics: Option<ParticleStatistics>,

    /// Measurement seed (falls back to $SYMKET_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    grid_min: Option<f64>,

    #[arg(long)]
    grid_max: Option<f64>,

    #[arg(long)]
    grid_points: Option<usize>,

    /// Infinite well `left,right,n`; repeat for each orbital.
    #[arg(long = "well", value_name = "LEFT,RIGHT,N")]
    wells: Vec<WellSpec>,

    /// Report path (json) or density path (csv). Defaults to stdout for json.
    #[arg(long)]
    output: Option<PathBuf>,

    #[arg(long, value_name = "json|csv")]
    format: Option<OutputFormat>,
}

impl Args {
    fn layers(self) -> Result<ConfigLayer, ConfigError> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            scenario: self.scenario.or(self.positional),
            statistics: self.statistics,
            a: self.a,
            b: self.b,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            grid_points: self.grid_points,
            wells: self.wells,
            seed: self.seed,
            output: self.output,
            format: self.format,
        };
        Ok(file.overridden_by(flags))
    }
}

fn seed_from_env() -> Result<Option<u64>, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|e: std::num::ParseIntError| ConfigError::Value {
            key: SEED_ENV.into(),
            message: e.to_string(),
        }),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match args.layers().and_then(|layer| layer.resolve(seed_from_env()?)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("symket: {e}");
            return ExitCode::from(2);
        }
    };

    let outcome = match run_scenario(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("symket: {}: {e}", config.scenario);
            return ExitCode::from(2);
        }
    };
    let report = outcome.report.to_json();

    let written = match (config.format, &config.output) {
        (OutputFormat::Json, Some(path)) => write_atomic(path, &report),
        (OutputFormat::Json, None) => {
            print!("{report}");
            Ok(())
        }
        (OutputFormat::Csv, Some(path)) => {
            // no profile means the computation failed; leave no CSV behind
            let written = match &outcome.profile {
                Some(profile) => write_atomic(path, &profile.to_csv()),
                None => Ok(()),
            };
            written.map(|()| print!("{report}"))
        }
        (OutputFormat::Csv, None) => unreachable!("resolve requires --output for csv"),
    };
    if let Err(e) = written {
        eprintln!("symket: cannot write output: {e}");
        return ExitCode::from(2);
    }

    for check in outcome.report.checks.iter().filter(|c| !c.pass) {
        eprintln!(
            "symket: check `{}` failed (error {:e}, tolerance {:e})",
            check.name, check.error, check.tolerance
        );
    }
    if outcome.report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
