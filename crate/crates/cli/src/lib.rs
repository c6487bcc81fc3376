//! Command-line front end: `hsflow run | audit | predict-limit | lemma-fuzz | linearize-audit`.
//!
//! Exit status is 0 when every check passes, 1 when some audit fails and 2
//! on any error, including usage errors.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Outcome;

#[derive(Debug, Parser)]
#[command(name = "hsflow", version, about = "T3-invariant hypersymplectic flow on T4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Source {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial-data preset, overriding the config: cosine, skewed, offdiag, constant.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the flow and write series.csv, snapshots.jsonl and manifest.json.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute the diagnostics of a finished run from its snapshots.
    Audit {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the limit volume and matrix fixed by the initial data.
    PredictLimit {
        #[command(flatten)]
        source: Source,
    },
    /// Randomized checks of the 3x3 matrix identities.
    LemmaFuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Finite-difference check of the linearized operator and its symbol.
    LinearizeAudit {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Run { source, out } => commands::run(&source.config, &source.preset, &out, &mut stdout),
        Command::Audit { out } => commands::audit(&out, &mut stdout),
        Command::PredictLimit { source } => commands::predict_limit(&source.config, &source.preset, &mut stdout),
        Command::LemmaFuzz { seed, trials } => commands::lemma_fuzz(seed, trials, &mut stdout),
        Command::LinearizeAudit { source, seed } => {
            commands::linearize_audit(&source.config, &source.preset, seed, &mut stdout)
        }
    };
    match result {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
