//! Command-line front end.
//!
//! Every command writes its reports plus `manifest.json` into the output
//! directory (`--out-dir`, else `$DDBOUNDS_OUT_DIR`, else `ddbounds-out`).
//! The manifest holds the resolved flags and can be fed back through
//! `--config` to repeat the run. Flags given on the command line win over
//! the config file.
//!
//! Exit codes: 0 success, 2 usage, 3 input I/O, 4 solver did not converge,
//! 5 numerical failure.

pub mod args;
mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Error;

pub use commands::{BaselineCmd, BoundsCmd, GenCmd, GlobalHullCmd, SolveCmd, SweepCmd};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

pub const OUT_DIR_ENV: &str = "DDBOUNDS_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ddbounds", version, about = "Response bounds from raw stress-strain data")]
pub struct Cli {
    /// Report directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "ddbounds-out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// JSON file mirroring the command's flags, or a previous manifest.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenCmd),
    /// One SLP run.
    Solve(SolveCmd),
    /// Lower, comparable and upper values of one dof.
    Bounds(BoundsCmd),
    /// Replicate experiments over noise and outlier grids.
    Sweep(SweepCmd),
    /// Classical distance-minimizing fixed-point solve.
    Baseline(BaselineCmd),
    /// One LP over the global convex hull of 1-D data.
    Globalhull(GlobalHullCmd),
}

/// Outcome of a command that ran to completion.
pub(crate) struct Done {
    pub converged: bool,
}

pub(crate) struct Ctx {
    pub out_dir: PathBuf,
    pub format: Format,
    pub jobs: Option<usize>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse(_) => EXIT_IO,
        Error::Config(_) | Error::DimensionMismatch { .. } | Error::DatasetTooSmall { .. } | Error::EmptyInput(_) => {
            EXIT_USAGE
        }
        _ => EXIT_NUMERICAL,
    }
}

/// Reads `path` as the flag set `T`, unwrapping a manifest's `config`, and
/// overlays the command-line flags.
pub(crate) fn merge_config<T: Serialize + DeserializeOwned + Clone>(path: Option<&Path>, flags: &T) -> crate::Result<T> {
    let Some(path) = path else {
        return Ok(flags.clone());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut v: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(c) = v.get_mut("config") {
        v = c.take();
    }
    let file: T = serde_json::from_value(v).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    args::overlay(file, flags)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Errors go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let ctx = Ctx {
        out_dir: cli.out_dir,
        format: cli.format,
        jobs: cli.jobs,
    };
    let cfg = cli.config.as_deref();
    let res = match &cli.command {
        Command::Gen(c) => commands::gen(&ctx, cfg, c),
        Command::Solve(c) => commands::solve(&ctx, cfg, c),
        Command::Bounds(c) => commands::bounds(&ctx, cfg, c),
        Command::Sweep(c) => commands::sweep(&ctx, cfg, c),
        Command::Baseline(c) => commands::baseline(&ctx, cfg, c),
        Command::Globalhull(c) => commands::globalhull(&ctx, cfg, c),
    };
    match res {
        Ok(Done { converged: true }) => EXIT_OK,
        Ok(Done { converged: false }) => EXIT_NOT_CONVERGED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
