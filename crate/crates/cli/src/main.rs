mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use hurwitz::suite::{Measurement, Suite};
use hurwitz::tolerances::Tolerances;
use hurwitz::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hurwitz", version, about = "Integrable systems on genus-zero Hurwitz spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Leave the timestamp out of the report so identical runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Seed for randomly sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance; takes precedence over HURWITZ_TOL.
    #[arg(long, global = true)]
    residual_tol: Option<f64>,
}

#[derive(Args)]
struct Input {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct GridInput {
    #[arg(long)]
    config: PathBuf,
    /// CSV output for plotting.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Rational coverings and their critical data.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Deformations of a covering along a path of branch points.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Scalar Cauchy-integral solutions.
    #[command(subcommand)]
    Rank1(Rank1Cmd),
    /// Bergmann kernel, rotation coefficients and the flat metric.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// Schlesinger systems pulled back to branch-point coordinates.
    #[command(subcommand)]
    Iso(IsoCmd),
    /// Hydrodynamic-type systems and the hodograph method.
    #[command(subcommand)]
    Hydro(HydroCmd),
    /// Acceptance suite.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum CoverCmd {
    Build(Input),
    Verify(Input),
}

#[derive(Subcommand)]
enum FlowCmd {
    Run(Input),
}

#[derive(Subcommand)]
enum Rank1Cmd {
    Solve(Input),
    Residual(Input),
    Tau(Input),
}

#[derive(Subcommand)]
enum GeometryCmd {
    Report(GridInput),
}

#[derive(Subcommand)]
enum IsoCmd {
    Run(Input),
    TauCheck(Input),
    Monodromy(Input),
}

#[derive(Subcommand)]
enum HydroCmd {
    Solve(Input),
    Evolve(GridInput),
    Verify(Input),
}

#[derive(Subcommand)]
enum VerifyCmd {
    All {
        #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

/// What a command produced before it is wrapped into a report.
pub struct Outcome {
    pub inputs: serde_json::Value,
    pub results: serde_json::Value,
    pub checks: Vec<Measurement>,
    pub csv: Option<Vec<Vec<String>>>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    tolerances: Tolerances,
    inputs: serde_json::Value,
    results: serde_json::Value,
    checks: Vec<Measurement>,
    passed: bool,
}

/// Write through a sibling temporary file so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn csv_bytes(rows: &[Vec<String>]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn dispatch(cli: &Cli, tol: &Tolerances) -> hurwitz::Result<(String, Outcome, Option<PathBuf>)> {
    use commands as c;
    let none = None;
    let (name, out, csv) = match &cli.command {
        Command::Cover(CoverCmd::Build(i)) => ("cover build", c::cover_build(&i.config, tol)?, &none),
        Command::Cover(CoverCmd::Verify(i)) => ("cover verify", c::cover_verify(&i.config, tol, cli.seed)?, &none),
        Command::Flow(FlowCmd::Run(i)) => ("flow run", c::flow_run(&i.config, tol)?, &none),
        Command::Rank1(Rank1Cmd::Solve(i)) => ("rank1 solve", c::rank1_solve(&i.config)?, &none),
        Command::Rank1(Rank1Cmd::Residual(i)) => ("rank1 residual", c::rank1_residual(&i.config, tol)?, &none),
        Command::Rank1(Rank1Cmd::Tau(i)) => ("rank1 tau", c::rank1_tau(&i.config, tol)?, &none),
        Command::Geometry(GeometryCmd::Report(g)) => ("geometry report", c::geometry_report(&g.config, tol)?, &g.csv),
        Command::Iso(IsoCmd::Run(i)) => ("iso run", c::iso_run(&i.config, tol)?, &none),
        Command::Iso(IsoCmd::TauCheck(i)) => ("iso tau-check", c::iso_tau_check(&i.config, tol)?, &none),
        Command::Iso(IsoCmd::Monodromy(i)) => ("iso monodromy", c::iso_monodromy(&i.config, tol)?, &none),
        Command::Hydro(HydroCmd::Solve(i)) => ("hydro solve", c::hydro_solve(&i.config, tol)?, &none),
        Command::Hydro(HydroCmd::Evolve(g)) => ("hydro evolve", c::hydro_evolve(&g.config, tol)?, &g.csv),
        Command::Hydro(HydroCmd::Verify(i)) => ("hydro verify", c::hydro_verify(&i.config, tol)?, &none),
        Command::Verify(VerifyCmd::All { suite }) => {
            let s = match suite {
                SuiteArg::Quick => Suite::Quick,
                SuiteArg::Full => Suite::Full,
            };
            ("verify all", c::verify_all(s, tol)?, &none)
        }
    };
    Ok((name.to_string(), out, csv.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tol = Tolerances::from_env();
    if let Some(r) = cli.residual_tol {
        tol.residual = r;
    }
    let (name, out, csv_path) = match dispatch(&cli, &tol) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            return ExitCode::from(if matches!(e, Error::ConfigParse(_)) { 2 } else { 1 });
        }
    };
    let passed = out.checks.iter().all(|m| m.passed);
    let timestamp = (!cli.no_timestamp)
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let report = Report {
        command: &name,
        timestamp,
        tolerances: tol,
        inputs: out.inputs,
        results: out.results,
        checks: out.checks,
        passed,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    let written = match &cli.output {
        Some(p) => write_atomic(p, json.as_bytes()),
        None => {
            print!("{json}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    if let (Some(path), Some(rows)) = (csv_path, out.csv) {
        let bytes = match csv_bytes(&rows) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("error: cannot format CSV: {e}");
                return ExitCode::from(1);
            }
        };
        if let Err(e) = write_atomic(&path, &bytes) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    for m in report.checks.iter().filter(|m| !m.passed) {
        eprintln!("FAIL {}: {:e} (tolerance {:e})", m.name, m.value, m.tolerance);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
