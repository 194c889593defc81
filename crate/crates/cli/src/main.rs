//! Command-line front end for optimal Poincaré constants, their bounds and
//! DGSM-based screening of the flood model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod constant;
mod error;
mod flood;
mod format;
mod grid;
mod selftest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use poincare::sa::StudyOptions;
use poincare::Family;

use crate::constant::{MethodChoice, Settings};
use crate::error::{CliError, CliResult};

const THREADS_VAR: &str = "POINCARE_THREADS";

#[derive(Parser)]
#[command(
    name = "poincare",
    version,
    about = "Optimal Poincaré constants of truncated 1-D laws, their bounds, and DGSM screening",
    after_help = "Distribution specs are JSON, e.g. {\"family\":\"normal\",\"location\":30,\"scale\":8,\"truncation\":[15,null]}.\n\
                  Pass a file path, '-' for stdin, or the JSON text itself.\n\
                  Set POINCARE_THREADS to fix the number of worker threads.\n\
                  Exit codes: 0 success, 1 i/o or self-test failure, 2 invalid input, 3 numerical failure."
)]
struct Cli {
    /// Significant digits of printed numbers.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal Poincaré constant of a distribution, as JSON.
    Constant {
        /// Distribution spec: JSON file, '-' for stdin, or inline JSON.
        spec: String,
        #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
        method: MethodChoice,
        /// Relative tolerance of the finite-element refinement.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Largest finite-element mesh before giving up.
        #[arg(long, default_value_t = 1 << 20)]
        max_elements: usize,
    },
    /// Every applicable two-sided bound on the constant, as JSON.
    Bounds {
        /// Distribution spec: JSON file, '-' for stdin, or inline JSON.
        spec: String,
    },
    /// CSV grid over the tail masses F(a) and 1 - F(b).
    ///
    /// Columns: lower_mass, upper_mass, a, b, constant, method,
    /// error_estimate, variance, transport_logistic, transport_doubleexp,
    /// muckenhoupt_lower, muckenhoupt_upper, error. Cell centres are
    /// (k + 1/2)/resolution on each axis; cells whose masses add up to 1 or
    /// more are left out. Failed cells keep their coordinates and an error
    /// message.
    Grid {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long, default_value_t = 0.0)]
        location: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Points per axis, at most 200.
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DGSM screening of the flood model.
    Flood {
        /// Sample size.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Inputs whose bound falls below this are reported inactive.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Bootstrap resamples for the standard deviations.
        #[arg(long, default_value_t = 500)]
        bootstrap: usize,
        #[arg(long, value_enum, default_value_t = flood::SamplingChoice::Halton)]
        sampling: flood::SamplingChoice,
        /// Full JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-input CSV table.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print the JSON report instead of the summary tables.
        #[arg(long)]
        json: bool,
    },
    /// Recomputes the published reference constants and bounds.
    Selftest,
}

fn parse_family(s: &str) -> Result<Family, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        format!("unknown family '{s}', expected one of {}", names.join(", "))
    })
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot start {threads} threads: {e}")))
}

fn print_json(v: &serde_json::Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let digits = cli.precision as usize;
    match cli.command {
        Command::Constant {
            spec,
            method,
            tol,
            max_elements,
        } => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Input(format!("tolerance must be in (0, 1), got {tol}")));
            }
            let d = constant::read_spec(&spec)?;
            let settings = Settings {
                method,
                tol,
                max_elements,
                precision: digits,
            };
            print_json(&constant::constant_json(&d, &settings)?)
        }
        Command::Bounds { spec } => {
            let d = constant::read_spec(&spec)?;
            print_json(&constant::bounds_command_json(&d, digits)?)
        }
        Command::Grid {
            family,
            location,
            scale,
            resolution,
            tol,
            out,
        } => {
            let req = grid::GridRequest {
                family,
                location,
                scale,
                resolution,
                tol,
            };
            let rows = grid::compute_grid(&req)?;
            match out {
                Some(path) => grid::write_csv(&rows, digits, std::fs::File::create(path)?),
                None => grid::write_csv(&rows, digits, std::io::stdout().lock()),
            }
        }
        Command::Flood {
            n,
            seed,
            threshold,
            bootstrap,
            sampling,
            out,
            csv,
            json,
        } => {
            let opts = StudyOptions {
                n,
                seed,
                sampling: sampling.into(),
                bootstrap,
            };
            let result = flood::run_study(&opts, threshold)?;
            let report = serde_json::to_value(&result).map_err(std::io::Error::from)?;
            if let Some(path) = out {
                let mut text = serde_json::to_string_pretty(&report).map_err(std::io::Error::from)?;
                text.push('\n');
                std::fs::write(path, text)?;
            }
            if let Some(path) = csv {
                flood::write_csv(&result.study, &path)?;
            }
            if json {
                print_json(&report)
            } else {
                print!("{}", flood::render(&result, digits));
                Ok(())
            }
        }
        Command::Selftest => {
            let (text, failed) = selftest::render(&selftest::run())?;
            print!("{text}");
            if failed > 0 {
                Err(CliError::SelfTest(failed))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = print_json(&e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
