use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crosm::config::{Overrides, RunConfig, MODE_ENV};
use crosm::error::Error;
use crosm::suite;

/// Invariant contact metric structures on tangent sphere bundles of
/// compact rank-one symmetric spaces.
#[derive(Parser, Debug)]
#[command(name = "crosm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Contact, K-contact, Sasakian and cone checks for one structure.
    Verify(Flags),
    /// Rebuild the CP^n family catalogue and test its K-contact conditions.
    Catalog(Flags),
    /// Einstein solver, uniqueness and Sasakian-Einstein constants.
    Einstein(Flags),
    /// Cone almost-Kaehler test against the contact condition.
    Cone(Flags),
    /// Infinitesimal model isomorphisms between CP^n families.
    Isomorphism(Flags),
    /// Every check for the chosen space.
    FullSuite(Flags),
    /// Task taken from the config file.
    Run(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML config with [space], [family] or [metric], and [run] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// sphere, rpn or cpn.
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// CP^n family: AI, AII, AIII, BI, BII, BIII or C.
    #[arg(long = "type")]
    family_type: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    qeps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    qhalf: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// "cos,sin" as rationals, or radians.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a0: Option<String>,
    /// exact or float.
    #[arg(long)]
    mode: Option<String>,
    /// Float-mode tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json, csv or text.
    #[arg(long)]
    format: Option<String>,
    /// Comma-separated check names that decide the exit code.
    #[arg(long)]
    require: Option<String>,
}

fn overrides(task: Option<&str>, f: &Flags) -> Overrides {
    Overrides {
        task: task.map(str::to_string),
        space: f.space.clone(),
        n: f.n,
        family_type: f.family_type.clone(),
        kappa: f.kappa.clone(),
        q_eps: f.qeps.clone(),
        q_half: f.qhalf.clone(),
        alpha: f.alpha.clone(),
        theta: f.theta.clone(),
        phi: f.phi.clone(),
        r: f.r.clone(),
        a0: f.a0.clone(),
        mode: f.mode.clone(),
        tol: f.tol,
        out: f.out.clone(),
        format: f.format.clone(),
        require: f.require.clone(),
    }
}

fn execute(task: Option<&str>, flags: &Flags) -> Result<i32, Error> {
    let text = match &flags.config {
        Some(p) => Some(fs::read_to_string(p).map_err(|e| Error::Input(format!("config: {}: {e}", p.display())))?),
        None => None,
    };
    let env_mode = std::env::var(MODE_ENV).ok();
    let cfg = RunConfig::build(text.as_deref(), &overrides(task, flags), env_mode.as_deref())?;
    let report = suite::run(&cfg)?;
    let body = report.render(cfg.format)?;
    match &cfg.out {
        Some(p) => fs::write(p, body).map_err(|e| Error::Input(format!("out: {}: {e}", p.display())))?,
        None => print!("{body}"),
    }
    if !report.passed {
        for it in report.items.iter().filter(|i| i.required && !i.check.passed()) {
            eprintln!("failed: {} :: {}", it.subject, it.check.name);
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (task, flags) = match &cli.command {
        Command::Verify(f) => (Some("verify"), f),
        Command::Catalog(f) => (Some("catalog"), f),
        Command::Einstein(f) => (Some("einstein"), f),
        Command::Cone(f) => (Some("cone"), f),
        Command::Isomorphism(f) => (Some("isomorphism"), f),
        Command::FullSuite(f) => (Some("full-suite"), f),
        Command::Run(f) => (None, f),
    };
    match execute(task, flags) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
