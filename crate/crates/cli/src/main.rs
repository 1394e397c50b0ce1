//! `beltrami` — command-line front end for the planar Beltrami-equation
//! laboratory in `beltrami-core`.
//!
//! Five subcommands: `solve` (one equation, field artifacts plus a
//! manifest), `ladder` (truncation ladder with per-level convergence data),
//! `check` (pointwise-majorant condition verdicts), `diagnose` (re-audit a
//! saved run directory), and `example` (closed-form reference fields and
//! coefficient tables).
//!
//! Exit codes are part of the contract:
//!
//! * `0` — success; `check` counts `inconclusive` verdicts as informational.
//! * `1` — usage or validation error (bad flags, bad config keys, parameter
//!   combinations outside the solvable class).
//! * `2` — the solver stopped without converging; partial artifacts are
//!   still written.
//! * `3` — I/O failure, including a held `.beltrami.lock` in the output
//!   directory.
//! * `4` — a requested verdict failed (`check` with a failing condition,
//!   `diagnose` with a reproduction mismatch).
//!
//! Everything written into the output directory is deterministic: manifests
//! carry no wall-clock data and field dumps are exact bit images, so two
//! runs with the same inputs produce byte-identical artifacts regardless of
//! `BELTRAMI_THREADS`. Progress and timing go to stderr only.

mod bcof;
mod cli;
mod commands;
mod config;
mod lock;

use clap::Parser;

/// Process-level failure classes, carrying the exit code contract.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation: flags, config file keys, or parameter validation.
    Usage(String),
    /// The solver stopped without meeting its tolerances.
    Solver(String),
    /// Filesystem or format trouble, including lock contention.
    Io(String),
    /// A requested verdict did not pass.
    Verdict(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Io(_) => 3,
            Failure::Verdict(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solver(m) | Failure::Io(m) | Failure::Verdict(m) => m,
        }
    }
}

/// Maps a core-library error onto the exit-code contract: filesystem and
/// format problems are I/O failures, everything else is a validation
/// failure (the library rejects inputs outside the solvable class).
pub fn core_failure(err: beltrami_core::Error) -> Failure {
    use beltrami_core::Error;
    match err {
        Error::Io(_) | Error::Format(_) | Error::Manifest { .. } => Failure::Io(err.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn main() {
    let parsed = match cli::Cli::try_parse() {
        Ok(parsed) => parsed,
        Err(err) => {
            use clap::error::ErrorKind;
            // Help and version are successes; everything else is a usage
            // error and must exit 1 (clap's default would be 2, which this
            // tool reserves for solver non-convergence).
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                err.exit();
            }
            eprint!("{err}");
            std::process::exit(1);
        }
    };

    let result = match parsed.command {
        cli::Command::Solve(args) => commands::run_solve(&args),
        cli::Command::Ladder(args) => commands::run_ladder_cmd(&args),
        cli::Command::Check(args) => commands::run_check(&args),
        cli::Command::Diagnose(args) => commands::run_diagnose(&args),
        cli::Command::Example(args) => commands::run_example(&args),
    };

    if let Err(failure) = result {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.exit_code());
    }
}
