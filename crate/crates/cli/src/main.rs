//! `unruh`: run scenario configs, plot traces, fit sideband scans.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure,
//! 3 finished with a truncation warning.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use unruh_sim::scenario::{
    emit_plot, feasibility_csv, feasibility_estimate, fit_csv, golden, golden_names, run_batch, Scenario,
};
use unruh_sim::tomography::{fit_distribution, read_scan, MAX_FIT_LEVELS};
use unruh_sim::{Error, Execution};

#[derive(Parser)]
#[command(name = "unruh", version, about = "Oscillating Unruh-DeWitt detector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario configs (file paths or bundled names).
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run the scenarios one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Render CSV columns as an SVG line plot.
    Plot {
        csv: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        cols: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a phonon distribution to a red and a blue sideband scan.
    Fit {
        red: PathBuf,
        blue: PathBuf,
        /// Highest phonon level in the fit.
        #[arg(long, default_value_t = MAX_FIT_LEVELS)]
        n_max: usize,
        /// Write the per-level table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the excitation-rate estimate of a feasibility config.
    Feasibility { config: String },
    /// List the bundled configs, or print one of them.
    ListGolden {
        #[arg(long)]
        show: Option<String>,
    },
}

/// Error plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NumericalInconsistency(_)
            | Error::IntegrationFailure { .. }
            | Error::UndefinedPeriod(_)
            | Error::IllConditionedFit { .. } => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn load(config: &str) -> Result<Scenario, Failure> {
    let text = match golden(config) {
        Some(text) if !Path::new(config).exists() => text.to_string(),
        _ => std::fs::read_to_string(config).map_err(|e| Failure { code: 1, message: format!("{config}: {e}") })?,
    };
    Scenario::parse(&text).map_err(|e| Failure { code: 1, message: format!("{config}: {e}") })
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Run { configs, out, sequential } => {
            let scenarios = configs.iter().map(|c| load(c)).collect::<Result<Vec<_>, _>>()?;
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let mut code = 0;
            let mut first_error = None;
            for (scenario, result) in scenarios.iter().zip(run_batch(&scenarios, exec)) {
                match result {
                    Ok(output) => {
                        for path in output.write_to(&out)? {
                            println!("{}", path.display());
                        }
                        if output.truncation_warning() {
                            warn!("{}: Fock truncation leakage above threshold", scenario.name());
                            code = 3;
                        }
                    }
                    Err(e) => {
                        let f = Failure::from(e);
                        eprintln!("{}: {}", scenario.name(), f.message);
                        first_error.get_or_insert(f.code);
                    }
                }
            }
            Ok(first_error.unwrap_or(code))
        }
        Command::Plot { csv, cols, out } => {
            emit_plot(&csv, &cols, &out)?;
            info!("wrote {}", out.display());
            Ok(0)
        }
        Command::Fit { red, blue, n_max, out } => {
            let red = read_scan(File::open(&red)?)?;
            let blue = read_scan(File::open(&blue)?)?;
            let fit = fit_distribution(&red, &blue, n_max)?;
            let table = fit_csv(&fit)?;
            match out {
                Some(path) => std::fs::write(path, table)?,
                None => print!("{table}"),
            }
            eprintln!(
                "<N> = {:.4} +- {:.4}, residual {:.3e}, condition number {:.3e}",
                fit.mean_phonon, fit.mean_phonon_sigma, fit.residual_norm, fit.condition_number
            );
            Ok(0)
        }
        Command::Feasibility { config } => {
            let Scenario::Feasibility(cfg) = load(&config)? else {
                return Err(Failure { code: 1, message: format!("{config}: not a feasibility config") });
            };
            let estimate = feasibility_estimate(&cfg.inputs()?)?;
            print!("{}", feasibility_csv(&estimate)?);
            Ok(0)
        }
        Command::ListGolden { show } => {
            match show {
                Some(name) => match golden(&name) {
                    Some(text) => print!("{text}"),
                    None => return Err(Failure { code: 1, message: format!("no bundled config named `{name}`") }),
                },
                None => golden_names().for_each(|n| println!("{n}")),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
