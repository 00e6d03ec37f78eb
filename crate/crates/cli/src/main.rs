//! Command-line front end for the exterior k-Hessian laboratory.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{RunConfig, Settings};
use run::{Outcome, RunError, Status};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

#[derive(Parser)]
#[command(name = "khessian", version, about = "Exterior k-Hessian solver, monotonicity audits and rigidity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat TOML file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized symmetric-function property battery.
    MatrixSuite(Common),
    /// Closed-form tables for the ball.
    Radial(Common),
    /// Solve the exterior problem and write a field checkpoint.
    Solve(Common),
    /// Functional on level sets, audited for monotonicity.
    Monotone(Common),
    /// Integral identities and inequalities.
    Identities(Common),
    /// Overdetermined-ball certification.
    Certify(Common),
    /// Solve, audit, ledger and certify a battery of bodies.
    Report(Common),
}

impl Command {
    fn parts(self) -> (&'static str, Common) {
        match self {
            Command::MatrixSuite(c) => ("matrix-suite", c),
            Command::Radial(c) => ("radial", c),
            Command::Solve(c) => ("solve", c),
            Command::Monotone(c) => ("monotone", c),
            Command::Identities(c) => ("identities", c),
            Command::Certify(c) => ("certify", c),
            Command::Report(c) => ("report", c),
        }
    }
}

fn config_error(violations: &[String]) -> ExitCode {
    let err = json!({ "error": "invalid-config", "violations": violations });
    eprintln!("{}", serde_json::to_string_pretty(&err).expect("plain data serializes"));
    ExitCode::from(EXIT_CONFIG)
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome, RunError> {
    match cfg.command.as_str() {
        "matrix-suite" => Ok(run::matrix_suite(cfg)),
        "radial" => run::radial(cfg),
        "solve" => run::solve_cmd(cfg),
        "monotone" => run::monotone(cfg),
        "identities" => run::identities(cfg),
        "certify" => run::certify(cfg),
        "report" => run::report(cfg),
        other => unreachable!("unknown command {other}"),
    }
}

fn write_artifacts(cfg: &RunConfig, outcome: &Outcome) -> std::io::Result<()> {
    let Some(dir) = &cfg.out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    for (name, text) in &outcome.artifacts {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let (command, common) = Cli::parse().command.parts();
    let settings = match &common.config {
        Some(path) => match Settings::load(path) {
            Ok(file) => file.merged(common.settings),
            Err(v) => return config_error(&v),
        },
        None => common.settings,
    };
    let cfg = match RunConfig::resolve(command, settings) {
        Ok(cfg) => cfg,
        Err(v) => return config_error(&v),
    };
    let outcome = match dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let err = json!({ "error": "solver-failure", "message": e.to_string(), "config_hash": cfg.hash() });
            eprintln!("{}", serde_json::to_string_pretty(&err).expect("plain data serializes"));
            return ExitCode::from(EXIT_SOLVER);
        }
    };
    if let Err(e) = write_artifacts(&cfg, &outcome) {
        eprintln!("{}", json!({ "error": "io", "message": e.to_string() }));
        return ExitCode::FAILURE;
    }
    print!("{}", outcome.stdout);
    match outcome.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Violation => ExitCode::from(EXIT_VIOLATION),
    }
}
