#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod meta;
mod options;

use options::Options;

/// Simulate maxima of GUE characteristic polynomials and evaluate their
/// predicted limiting law.
#[derive(Debug, Parser)]
#[command(name = "gue-extremes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with default values for any of the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Dump the centered field of one realization on a mesh (x, f).
    Sample,
    /// Run an ensemble and record the maximum of each realization.
    Maxima,
    /// Tabulate the predicted density of y and/or y'.
    Predict,
    /// Fit the affine correction and compare with the predicted law.
    Compare,
    /// Selberg integral: closed form against Monte Carlo.
    CheckSelberg,
    /// Self-duality of the continued moments and the frozen transform.
    CheckDuality,
    /// Golden values and identities of Γ, G and the normalization constant.
    CheckSpecialfns,
    /// Sweep N and emit the fitted corrections with bootstrap errors.
    Table1,
}

/// Bad flags, config or parameters: exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<UsageError>() {
        return 1;
    }
    match e.downcast_ref::<gue_extremes::Error>() {
        Some(gue_extremes::Error::InvalidParameter(_) | gue_extremes::Error::OutOfDomain(_)) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => Options::load(p)?,
        None => Options::default(),
    };
    let opts = cli.options.over(file);
    std::fs::create_dir_all(opts.out_dir())?;
    match cli.command {
        Command::Sample => commands::sample(&opts),
        Command::Maxima => commands::maxima(&opts),
        Command::Predict => commands::predict(&opts),
        Command::Compare => commands::compare(&opts),
        Command::CheckSelberg => commands::check_selberg(&opts),
        Command::CheckDuality => commands::check_duality(&opts),
        Command::CheckSpecialfns => commands::check_specialfns(&opts),
        Command::Table1 => commands::table1(&opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
