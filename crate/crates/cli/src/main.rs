//! `lab`: runs dglab experiments from JSON configs and writes CSV/JSON tables.
//!
//! Exit status: 0 when every verdict passes, 2 when any verdict fails, 1 on
//! usage, configuration or runtime errors.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod capacity;
mod config;
mod counterexample;
mod dgcheck;
mod error;
mod growth;
mod output;
mod report;
mod solve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;
use error::{io_err, CliError, Result};
use output::RunSummary;

#[derive(Parser)]
#[command(name = "lab", version, about = "Capacity, counterexample and De Giorgi class experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Paths {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Variational condenser capacities against closed forms.
    Capacity(Paths),
    /// Eigenvalues, strong residuals and weak forms of a family.
    Counterexample(Paths),
    /// Dirichlet solves under refinement with exact traces.
    Solve(Paths),
    /// De Giorgi class estimates on a sampled family.
    Dgcheck(Paths),
    /// Growth curves, fitted exponents and the iteration exponent.
    Growth(Paths),
    /// PASS/FAIL counts over result tables.
    Report(Paths),
}

impl Command {
    fn split(&self) -> (&'static str, &Paths) {
        match self {
            Command::Capacity(p) => ("capacity", p),
            Command::Counterexample(p) => ("counterexample", p),
            Command::Solve(p) => ("solve", p),
            Command::Dgcheck(p) => ("dgcheck", p),
            Command::Growth(p) => ("growth", p),
            Command::Report(p) => ("report", p),
        }
    }
}

fn init_pool() -> Result<()> {
    let Ok(value) = std::env::var("LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("LAB_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn execute(kind: &str, paths: &Paths) -> Result<RunSummary> {
    let text = std::fs::read_to_string(&paths.config).map_err(io_err(&paths.config))?;
    let config = Config::parse(&text, kind)?;
    std::fs::create_dir_all(&paths.out).map_err(io_err(&paths.out))?;
    let base = paths.config.parent().unwrap_or(Path::new("."));
    let out = paths.out.as_path();
    let mut summary = match &config {
        Config::Capacity(c) => capacity::run(c, out)?,
        Config::Counterexample(c) => counterexample::run(c, out)?,
        Config::Solve(c) => solve::run(c, out)?,
        Config::Dgcheck(c) => dgcheck::run(c, out)?,
        Config::Growth(c) => growth::run(c, out)?,
        Config::Report(c) => report::run(c, base, out)?,
    };
    output::write_json(&out.join(format!("{}.config.json", config.kind())), &config, &mut summary)?;
    Ok(summary)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (kind, paths) = cli.command.split();
    let result = init_pool().and_then(|_| execute(kind, paths));
    match result {
        Ok(summary) => {
            for f in &summary.files {
                eprintln!("wrote {}", f.display());
            }
            if summary.failed > 0 {
                eprintln!("{kind}: {} of {} verdicts FAILED", summary.failed, summary.rows);
                ExitCode::from(2)
            } else {
                eprintln!("{kind}: all {} verdicts passed", summary.rows);
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
