use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use reslab_cli::commands::{self, write_atomic, GenArgs};
use reslab_cli::{InstanceFile, Kind, Lab, Suite, Tamper, VerifyOptions};
use resolvent_lab::resolvents::DEFAULT_SECTOR_EPSILON;
use resolvent_lab::spectral::{Region, DEFAULT_GRID};
use resolvent_lab::TolPolicy;

#[derive(Parser, Debug)]
#[command(name = "reslab", version, about = "Generalized resolvents of isometric and symmetric operators")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct TolArgs {
    /// Absolute floor for rank and null-space decisions.
    #[arg(long, global = true)]
    abs_floor: Option<f64>,
    /// Relative rank threshold (multiplied by dimension and largest singular value).
    #[arg(long, global = true)]
    rank_rel: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write a random instance with a unitary or self-adjoint exit-space extension.
    Gen {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Domain dimension of the exit-space operator (symmetric only).
        #[arg(long = "de", default_value_t = 0)]
        d_exit: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exits 1 when a check fails.
    Verify {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Corrupt the resolvent before checking it.
        #[arg(long, value_enum)]
        tamper: Option<Tamper>,
        /// Sector half-opening for the ray towards infinity.
        #[arg(long, default_value_t = DEFAULT_SECTOR_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the resolvent at the given points (re,im) or on a standard grid.
    Resolvent {
        instance: PathBuf,
        #[arg(long = "point", value_parser = parse_complex, allow_hyphen_values = true)]
        points: Vec<Complex64>,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Atoms of the spectral measure.
    Spectrum {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide analytic continuation of the resolvent across an arc or interval.
    Gap {
        instance: PathBuf,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, conflicts_with = "interval")]
        arc: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        interval: Option<(f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two numbers separated by a comma")?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        Some(_) => parse_pair(s).map(|(re, im)| Complex64::new(re, im)),
        None => s.trim().parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|e| format!("{s:?}: {e}")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path, tol: TolPolicy) -> Result<Lab> {
    let f = InstanceFile::load(path)?;
    Lab::build(&f, tol).map_err(|e| anyhow!("{}: {e:#}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let base = TolPolicy::default();
    let tol = TolPolicy::new(cli.tol.abs_floor.unwrap_or(base.abs_floor), cli.tol.rank_rel.unwrap_or(base.rank_rel))?;
    match cli.cmd {
        Cmd::Gen { kind, n, d, m, d_exit, seed, out } => {
            let (file, warnings) = commands::gen(&GenArgs { kind, n, d, m, d_exit, seed }, &tol)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            emit(out.as_deref(), &file.to_json())?;
        }
        Cmd::Verify { instance, suite, tamper, epsilon, out } => {
            let lab = load(&instance, tol)?;
            let report = reslab_cli::suites::verify(&lab, suite, &VerifyOptions { tamper, epsilon });
            emit(out.as_deref(), &report.to_json())?;
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}{}", c.name, c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default());
            }
            if !report.summary.all_pass {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Resolvent { instance, points, grid, out } => {
            let lab = load(&instance, tol)?;
            emit(out.as_deref(), &commands::resolvent(&lab, &points, grid)?)?;
        }
        Cmd::Spectrum { instance, out } => {
            let lab = load(&instance, tol)?;
            emit(out.as_deref(), &commands::spectrum(&lab)?)?;
        }
        Cmd::Gap { instance, arc, interval, grid, out } => {
            let lab = load(&instance, tol)?;
            let region = match (arc, interval) {
                (Some((a, b)), None) => Region::arc(a, b)?,
                (None, Some((a, b))) => Region::interval(a, b)?,
                _ => return Err(anyhow!("give one of --arc or --interval")),
            };
            emit(out.as_deref(), &commands::gap(&lab, &region, grid)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
