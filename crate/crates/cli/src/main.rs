//! `tauberkit` command line: corpus verification, condition checks, η and ρ
//! scans, special-function tables and law fitting on sampled data.
//!
//! Exit status is 0 when every check passes, 1 when a check fails or a
//! computation cannot meet its tolerance, and 2 for usage or input errors.

mod cli;
mod commands;
mod report;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use cli::{Cli, Command};
use commands::Settings;

const THREADS_VAR: &str = "TAUBERKIT_THREADS";

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| tauberkit::Error::InvalidInput(format!("{THREADS_VAR}={raw:?} is not a thread count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let format = cli.global.format;
    let out = cli.global.out.clone();
    let s = Settings { global: cli.global };
    let report = match &cli.command {
        Command::VerifyCorpus => commands::verify_corpus(&s)?,
        Command::Analyze { input, window, ratio_tol, ratio_grid } => {
            commands::analyze(input, *window, *ratio_tol, *ratio_grid)?
        }
        Command::Check { exemplar, condition, t, beta, j } => {
            commands::check(&s, exemplar, *condition, *t, *beta, *j)?
        }
        Command::EtaScan { exemplar, t } => commands::eta_scan(&s, exemplar, t)?,
        Command::Rho { exemplar, times, constant } => commands::rho(&s, exemplar, times, *constant)?,
        Command::Specialfn { j } => commands::specialfn(&s, j)?,
        Command::Corpus { action } => commands::corpus(action)?,
    };
    report.emit(format, out.as_deref())?;
    Ok(report.pass)
}

/// Bad arguments and unreadable input map to 2; everything else that stops
/// a computation counts as a failed check.
fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        if let Some(e) = cause.downcast_ref::<tauberkit::Error>() {
            return matches!(
                e,
                tauberkit::Error::InvalidInput(_)
                    | tauberkit::Error::Csv { .. }
                    | tauberkit::Error::OutOfRegion(_)
                    | tauberkit::Error::HypothesisViolation(_)
            );
        }
        cause.downcast_ref::<std::io::Error>().is_some()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_input_error(&err) { 2 } else { 1 })
        }
    }
}
