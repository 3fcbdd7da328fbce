//! `warpband`: generate, warp, truncate and inspect bandlimited signals.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, format or I/O, 3 numerical.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use warpband::{Error, ErrorCategory};

use commands::{
    ClassifyArgs, DbrCommand, GenArgs, GramArgs, ProjectArgs, Run, TruncateArgs, WarpArgs,
};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "warpband",
    version,
    about = "Composition operators on Paley-Wiener spaces"
)]
struct Cli {
    /// JSON run configuration (format warpband-config/1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a sinc or random spectrum signal.
    Gen(GenArgs),
    /// Sample f∘φ on a time grid.
    Warp(WarpArgs),
    /// Re-bandlimit warped samples and emit the error curve.
    Truncate(TruncateArgs),
    /// Decide whether a warp keeps B²_a invariant.
    Classify(ClassifyArgs),
    /// Gram matrix of the warped kernel on integer nodes.
    Gram(GramArgs),
    /// Project warped samples onto the span of kernel sections.
    Project(ProjectArgs),
    /// de Branges–Rovnyak checks.
    #[command(subcommand)]
    Dbr(DbrCommand),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Warp(_) => "warp",
            Command::Truncate(_) => "truncate",
            Command::Classify(_) => "classify",
            Command::Gram(_) => "gram",
            Command::Project(_) => "project",
            Command::Dbr(_) => "dbr",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Numerical => 3,
        ErrorCategory::Validation | ErrorCategory::Io => 2,
    }
}

fn execute(cli: &Cli) -> Result<String, Error> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let run: Run = match &cli.command {
        Command::Gen(a) => commands::gen(a, &config)?,
        Command::Warp(a) => commands::warp(a, &config)?,
        Command::Truncate(a) => commands::truncate(a, &config)?,
        Command::Classify(a) => commands::classify_cmd(a, &config)?,
        Command::Gram(a) => commands::gram(a, &config)?,
        Command::Project(a) => commands::project(a, &config)?,
        Command::Dbr(a) => commands::dbr(a, &config)?,
    };
    output::commit(
        &config,
        cli.command.name(),
        &run.parameters,
        &run.inputs,
        run.outputs,
    )?;
    Ok(run.stdout)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
