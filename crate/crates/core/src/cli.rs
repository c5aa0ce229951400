//! Command-line front end. Exit codes: 0 success, 1 usage or validation
//! error, 2 numerical or I/O failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, SimConfig};
use crate::error::Error;
use crate::models::{self, ModelKind, ModelParams};
use crate::output;
use crate::stability;
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "delayq",
    version,
    about = "Two-queue fluid models with delayed logit choice",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one scenario and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Report the critical delay(s) and Hopf frequency.
    CriticalDelay(CriticalArgs),
    /// Tabulate the first Hopf curve over a lambda grid.
    HopfCurve(CurveArgs),
    /// Compare predicted and simulated regimes over a (lambda, delta) grid.
    Sweep(SweepArgs),
    /// Run the built-in invariant checks.
    Verify,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    step: Option<f64>,
    /// Constant history of queue 1 (default 1.1 q*).
    #[arg(long, requires = "phi2")]
    phi1: Option<f64>,
    /// Constant history of queue 2 (default 0.9 q*).
    #[arg(long, requires = "phi1")]
    phi2: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    /// Scan interval for the moving-average model.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    bracket: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    mu: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 200.0)]
    horizon: f64,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Writes CSV either to `path` or to `stdout`.
fn emit<F>(path: Option<&PathBuf>, stdout: &mut dyn Write, write: F) -> Result<(), Error>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Error>,
{
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if informational {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Simulate(a) => {
            let params = ModelParams::new(a.lambda, a.mu, a.delta)?;
            let phi = match (a.phi1, a.phi2) {
                (Some(p1), Some(p2)) => (p1, p2),
                _ => models::default_histories(&params),
            };
            let traj = models::simulate(a.model, &params, phi, a.horizon, a.step)?;
            emit(a.out.as_ref(), stdout, |w| output::write_trajectory_csv(&traj, a.model, w))?;
            Ok(EXIT_OK)
        }
        Command::CriticalDelay(a) => {
            let bracket = a.bracket.map(|b| (b[0], b[1]));
            critical_delay_report(a.model, a.lambda, a.mu, bracket, stdout)?;
            Ok(EXIT_OK)
        }
        Command::HopfCurve(a) => {
            let curve = stability::hopf_curve(a.model, a.mu, a.lambda_min, a.lambda_max, a.points)?;
            emit(a.out.as_ref(), stdout, |w| output::write_hopf_curve_csv(&curve, w))?;
            Ok(EXIT_OK)
        }
        Command::Sweep(a) => {
            let sim = SimConfig {
                horizon: a.horizon,
                step: a.step,
                ..Default::default()
            };
            let rows = analysis::sweep(a.model, a.mu, &a.lambdas, &a.deltas, &sim)?;
            emit(a.out.as_ref(), stdout, |w| output::write_sweep_csv(&rows, w))?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let results = verify::run_all();
            let mut failed = 0;
            for r in &results {
                writeln!(stdout, "[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
                failed += usize::from(!r.passed);
            }
            writeln!(stdout, "{} checks, {failed} failed", results.len())?;
            Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
        }
    }
}

fn critical_delay_report(
    model: ModelKind,
    lambda: f64,
    mu: f64,
    bracket: Option<(f64, f64)>,
    out: &mut dyn Write,
) -> Result<(), Error> {
    ModelParams::new(lambda, mu, 0.0)?;
    match model {
        ModelKind::ConstantDelay => match stability::critical_delay_constant(lambda, mu)? {
            Some(p) => {
                writeln!(out, "model: constant, lambda = {lambda}, mu = {mu}")?;
                writeln!(out, "delta_cr = {}", output::format_sig(p.delta_cr))?;
                writeln!(out, "omega = {}", output::format_sig(p.omega))?;
            }
            None => writeln!(out, "no Hopf bifurcation: λ ≤ 2μ (lambda = {lambda}, mu = {mu})")?,
        },
        ModelKind::MovingAverage => {
            let points = stability::critical_delay_ma(lambda, mu, bracket)?;
            writeln!(out, "model: moving-average, lambda = {lambda}, mu = {mu}")?;
            if points.is_empty() {
                writeln!(out, "no validated Hopf point in range")?;
            }
            for p in points {
                writeln!(
                    out,
                    "branch {}: delta_cr = {}, omega = {}",
                    p.branch,
                    output::format_sig(p.delta_cr),
                    output::format_sig(p.omega)
                )?;
            }
        }
    }
    Ok(())
}
