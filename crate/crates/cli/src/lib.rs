//! Command-line front end. Every subcommand prints one JSON report
//! `{command, config, inputs_digest, results, pass, wall_clock}`.
//!
//! Exit codes: 0 when every pass flag holds, 1 when a mathematical check fails,
//! 2 for usage and input errors.

pub mod args;
pub mod commands;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

pub use args::{Cli, Command, Global};
pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Parses and executes one invocation, returning the report (or an input error).
pub fn invoke(cli: &Cli) -> anyhow::Result<Report> {
    let start = Instant::now();
    let config = serde_json::json!({
        "global": {
            "seed": cli.global.seed,
            "restarts": cli.global.restarts,
            "tol_eigen": cli.global.tol_eigen,
            "tol_bp": cli.global.tol_bp,
        },
        "args": cli.command,
    });
    if cli.global.restarts == 0 {
        anyhow::bail!("--restarts must be at least 1");
    }
    for (name, tol) in [
        ("--tol-eigen", cli.global.tol_eigen),
        ("--tol-bp", cli.global.tol_bp),
    ] {
        if !(tol.is_finite() && tol >= 0.0) {
            anyhow::bail!("{name} must be a non-negative number");
        }
    }
    let outcome = commands::execute(&cli.command, &cli.global)?;
    Ok(Report {
        command: cli.command.name().into(),
        inputs_digest: report::digest(&config, &outcome.inputs),
        config,
        results: outcome.results,
        pass: outcome.pass,
        wall_clock: start.elapsed().as_secs_f64(),
    })
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let report = match invoke(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_INPUT;
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
    if let Some(path) = &cli.global.out {
        if let Err(e) = report::write_atomic(path, text.as_bytes()) {
            eprintln!("error: {e:#}");
            return EXIT_INPUT;
        }
    }
    print!("{text}");
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}
