use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use weakcontact_cli::suite::{DEFAULT_POINTS, DEFAULT_SEED, DEFAULT_TOL};
use weakcontact_cli::{emit_report, load_spec, run_suite, CliError, Format, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "weakcontact", version, about = "Verify weak almost contact metric structures, weak β-Kenmotsu manifolds and *-η-Ricci solitons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a manifold spec and print a report.
    Verify {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Tolerance for one check family, e.g. `soliton=1e-7`. Repeatable.
        #[arg(long = "family-tol", value_name = "FAMILY=TOL", value_parser = parse_family_tol)]
        family_tol: Vec<(Suite, f64)>,
        #[arg(long, value_enum, default_value = "text")]
        report: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
}

fn parse_family_tol(s: &str) -> Result<(Suite, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected FAMILY=TOL")?;
    let suite = <Suite as clap::ValueEnum>::from_str(name.trim(), true)?;
    let tol = value.trim().parse::<f64>().map_err(|e| format!("bad tolerance `{value}`: {e}"))?;
    Ok((suite, tol))
}

fn verify(
    spec: PathBuf,
    config: RunConfig,
    format: Format,
    out: Option<PathBuf>,
) -> Result<bool, CliError> {
    let loaded = load_spec(&spec)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let report = run_suite(&loaded.bundle, loaded.soliton.as_ref(), &config)?;
    let text = emit_report(&report, format)?;
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?,
        None => print!("{text}"),
    }
    Ok(report.overall_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { spec, suite, points, seed, tol, family_tol, report, out, timing } => {
            let config = RunConfig { points, seed, tol, family_tol: family_tol.into_iter().collect(), suite, timing };
            match verify(spec, config, report, out) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::FAILURE,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
