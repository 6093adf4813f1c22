//! `stability-lab` command-line runner.
//!
//! Settings come from a single JSON config (`--config`); command-line flags
//! override the matching config fields (currently `--seed`), and fields
//! absent from both fall back to documented defaults.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;
use stability_lab::report::SCHEMA_VERSION;

use commands::{Outcome, Subcommand};
use config::LoadedConfig;

/// Stability diagnostics for generative models over finite content domains.
#[derive(Debug, Parser)]
#[command(name = "stability-lab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the subcommand's table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

const THREADS_ENV: &str = "STABILITY_LAB_THREADS";

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV}={value} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn write_csv(path: &PathBuf, outcome: &Outcome, subcommand: &str) -> Result<()> {
    let table = outcome
        .table
        .as_ref()
        .with_context(|| format!("`{subcommand}` has no tabular output for --csv"))?;
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(&table.header)?;
    for row in &table.rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    let loaded = match &cli.config {
        Some(path) => LoadedConfig::from_file(path)?,
        None => LoadedConfig::empty(),
    };
    let seed = cli.seed.or(loaded.config.seed).unwrap_or(0);
    let started = Instant::now();
    let outcome = commands::run(cli.subcommand, &loaded, seed)?;
    let mut resolved = loaded.resolved()?;
    resolved.seed = Some(seed);

    let name = cli.subcommand.name();
    let report = json!({
        "schema": SCHEMA_VERSION,
        "subcommand": name,
        "seed": seed,
        "config": resolved,
        "result": outcome.result,
        "passed": outcome.passed,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&report)?;
    match &cli.out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    if let Some(path) = &cli.csv {
        write_csv(path, &outcome, name)?;
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
