//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 validation failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::config::{Grid, SweepConfig};
use super::curves::{run_sct_curves, write_curves, CurveConfig, CurveSpectrum};
use super::sweep::{run_sweep, write_sweep};
use super::validation::run_validation;
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable capping worker threads; 0 or unset means automatic.
pub const THREADS_ENV: &str = "KARE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kare", version, about = "Kernel ridge regression risk estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpectrumName {
    RbfGaussian,
    PowerLaw,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every lengthscale × ridge cell of a configured grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; overrides the config's `out`. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact and estimated signal capture thresholds over N and ridge grids.
    Sct {
        #[arg(long, value_enum)]
        spectrum: SpectrumName,
        #[arg(long, default_value_t = 20)]
        dim: u32,
        /// Absolute lengthscale; defaults to the dimension.
        #[arg(long)]
        lengthscale: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 10)]
        k_max: u32,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Comma-separated values or start:stop:count:scale.
        #[arg(long, default_value = "100,1000", allow_hyphen_values = true)]
        n_grid: String,
        #[arg(long, default_value = "-4:0:9:log10", allow_hyphen_values = true)]
        ridge_grid: String,
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a validation suite and print a JSON report.
    Validate {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    if text.contains(':') {
        return Ok(Grid::parse_positive(text)?.values());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .ok_or_else(|| Error::Config(format!("'{s}' is not a positive number")))
        })
        .collect()
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    parse_values(text)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r < 1.0 {
                Err(Error::Config(format!("sample size {v} rounds to zero")))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

fn write_output(out: Option<&PathBuf>, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w).map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Configures thread pools from [`THREADS_ENV`]. Dense kernels run single
/// threaded; parallelism comes from independent grid cells and trials.
pub fn init_threads() -> Result<()> {
    faer::set_global_parallelism(faer::Par::Seq);
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a nonnegative integer, got '{v}'")))?,
        Err(_) => 0,
    };
    if threads > 0 {
        // a pool may already exist when embedded in another program
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::debug!("keeping existing thread pool: {e}");
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::from_file(&config)?;
            let records = run_sweep(&cfg)?;
            write_output(out.as_ref().or(cfg.out.as_ref()), |w| write_sweep(&records, w))?;
            Ok(EXIT_OK)
        }
        Command::Sct {
            spectrum,
            dim,
            lengthscale,
            sigma,
            k_max,
            beta,
            count,
            n_grid,
            ridge_grid,
            trials,
            seed,
            out,
        } => {
            let spectrum = match spectrum {
                SpectrumName::RbfGaussian => CurveSpectrum::RbfGaussian {
                    dim,
                    lengthscale: lengthscale.unwrap_or(dim as f64),
                    sigma,
                    k_max,
                },
                SpectrumName::PowerLaw => CurveSpectrum::PowerLaw { beta, count },
            };
            let cfg = CurveConfig {
                spectrum,
                n_grid: parse_sizes(&n_grid)?,
                ridges: parse_values(&ridge_grid)?,
                trials,
                seed,
            };
            let records = run_sct_curves(&cfg)?;
            write_output(out.as_ref(), |w| write_curves(&records, w))?;
            Ok(EXIT_OK)
        }
        Command::Validate { suite, seed, out } => {
            let report = run_validation(&suite, seed)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?;
            write_output(out.as_ref(), |w| writeln!(w, "{json}"))?;
            for s in &report.suites {
                for c in &s.checks {
                    log::info!("{} {}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, s.name, c.name, c.detail);
                }
            }
            Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                EXIT_DATA
            } else {
                EXIT_USAGE
            }
        }
    }
}
