//! `altocc`: configuration-driven runs of the altitude power models.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric
//! failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "altocc", version, about = "Aggregate received power at an aerial receiver versus height")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form, quadrature and asymptote curves.
    Sosgad(Common),
    /// Fit the break-point LoS laws to an environment triple.
    FitLos(Common),
    /// Monte Carlo estimate over random (or fixed) ground transmitters.
    Montecarlo(Common),
    /// Site power and LoS statistics from a building map.
    Raytrace(Common),
    /// Turn spectrum sweeps and GPS fixes into band power versus altitude.
    Ingest(Common),
    /// Align curve files on one height grid and report their gaps.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    #[value(name = "csv+plot")]
    CsvPlot,
}

type Action = fn(&Context) -> Result<(), CliError>;

fn run(command: Command) -> Result<(), CliError> {
    let (common, action): (Common, Action) = match command {
        Command::Sosgad(c) => (c, commands::sosgad),
        Command::FitLos(c) => (c, commands::fit_los),
        Command::Montecarlo(c) => (c, commands::montecarlo),
        Command::Raytrace(c) => (c, commands::raytrace),
        Command::Ingest(c) => (c, commands::ingest),
        Command::Compare(c) => (c, commands::compare),
    };
    let mut cfg = RunConfig::load(&common.config)?;
    cfg.seed = common.seed.unwrap_or(cfg.seed);
    std::fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
    let ctx = Context {
        seed: cfg.seed,
        cfg,
        out: common.out,
        plot: common.format == Format::CsvPlot,
    };
    action(&ctx)?;
    let effective = ctx.out.join("config.toml");
    std::fs::write(&effective, ctx.cfg.to_text()).map_err(|e| CliError::io(&effective, e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("altocc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
