//! Command line front end.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::experiments::{run_experiment, RunError};
use crate::report::{self, read_history};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

pub const DIAGNOSTIC_FILE: &str = "diagnostic.json";

#[derive(Debug, Parser)]
#[command(name = "chanfsi", version, about = "Coupled fluid-structure fixed-point solver on a periodic channel")]
pub struct Cli {
    /// Overrides the seed given in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sample suites (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the output directory given in the configuration.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs the experiment described by a TOML configuration.
    Run { config: PathBuf },
    /// Prints a summary of a convergence history CSV.
    Summary { csv: PathBuf },
}

/// Machine-readable record written on every failed invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub status: &'static str,
    pub exit_code: i32,
    pub key: Option<String>,
    pub kind: Option<String>,
    pub message: String,
    pub experiment: Option<String>,
}

impl Diagnostic {
    fn from_run(e: &RunError, experiment: Option<&str>) -> Self {
        let (status, exit_code, key, kind) = match e {
            RunError::Config(c) => ("config_error", EXIT_CONFIG, c.key().map(str::to_owned), None),
            RunError::Numerical { kind, .. } => ("numerical_failure", EXIT_NUMERICAL, None, Some((*kind).to_owned())),
            RunError::Output(_) => ("io_error", EXIT_CONFIG, None, None),
        };
        Self { status, exit_code, key, kind, message: e.to_string(), experiment: experiment.map(str::to_owned) }
    }
}

fn emit(diag: &Diagnostic, dir: &Path) {
    eprintln!("error: {}", diag.message);
    let written = std::fs::create_dir_all(dir)
        .map_err(|e| e.to_string())
        .and_then(|_| report::write_json(&dir.join(DIAGNOSTIC_FILE), diag).map_err(|e| e.to_string()));
    if let Err(e) = written {
        eprintln!("error: could not write diagnostic: {e}");
        if let Ok(text) = serde_json::to_string(diag) {
            eprintln!("{text}");
        }
    }
}

/// Runs the parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already configured: {e}");
        }
    }
    match cli.command {
        Command::Run { config } => run(&config, cli.seed, cli.output_dir),
        Command::Summary { csv } => summary(&csv, cli.output_dir),
    }
}

fn run(path: &Path, seed: Option<u64>, output_dir: Option<PathBuf>) -> i32 {
    let fallback = output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            emit(&Diagnostic::from_run(&RunError::Config(e), None), &fallback);
            return EXIT_CONFIG;
        }
    };
    if seed.is_some() {
        config.seed = seed;
    }
    if let Some(dir) = output_dir {
        config.output.dir = dir;
    }
    let name = config.experiment.name();
    match run_experiment(&config) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                println!("wrote {}", a.display());
            }
            match outcome.failure {
                None => EXIT_OK,
                Some(message) => {
                    let diag = Diagnostic {
                        status: "numerical_failure",
                        exit_code: EXIT_NUMERICAL,
                        key: None,
                        kind: Some("convergence".into()),
                        message,
                        experiment: Some(name.into()),
                    };
                    emit(&diag, &config.output.dir);
                    EXIT_NUMERICAL
                }
            }
        }
        Err(e) => {
            let diag = Diagnostic::from_run(&e, Some(name));
            emit(&diag, &config.output.dir);
            diag.exit_code
        }
    }
}

fn summary(path: &Path, output_dir: Option<PathBuf>) -> i32 {
    match read_history(path) {
        Ok(s) => {
            print!("{s}");
            EXIT_OK
        }
        Err(e) => {
            let key = match &e {
                report::ReportError::Schema { column, .. } => Some(column.clone()),
                report::ReportError::Io { .. } => None,
            };
            let diag = Diagnostic {
                status: "schema_error",
                exit_code: EXIT_CONFIG,
                key,
                kind: None,
                message: e.to_string(),
                experiment: None,
            };
            let dir = output_dir.unwrap_or_else(|| path.parent().map_or_else(|| PathBuf::from("."), Path::to_owned));
            emit(&diag, &dir);
            EXIT_CONFIG
        }
    }
}
