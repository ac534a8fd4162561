use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nanoplate_cli::error::{EXIT_FAILURE, EXIT_OK};
use nanoplate_cli::reference::{run_validate, ValidateOptions};
use nanoplate_cli::runner::{run_converge, run_solve, run_sweep, write_converge, write_rows};
use nanoplate_cli::{AnalysisConfig, CliError, SweepConfig};

#[derive(Parser)]
#[command(name = "nanoplate", version, about = "Free vibration of FG nonlocal Mindlin nanoplates")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// CSV destination (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of modes to report (overrides the config)
    #[arg(long, global = true)]
    modes: Option<usize>,

    /// Worker threads for sweeps and validation
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Only print errors
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration
    Solve { config: PathBuf },
    /// Cartesian parameter sweep
    Sweep { config: PathBuf },
    /// Fundamental frequency over a sequence of control nets
    Converge {
        config: PathBuf,
        /// Square net sizes, ascending
        #[arg(long, value_delimiter = ',', default_value = "5,9,13,17,21")]
        nets: Vec<usize>,
    },
    /// Compare against the embedded reference tables
    Validate {
        /// Shear correction factor
        #[arg(long, default_value_t = nanoplate::material::DEFAULT_SHEAR_CORRECTION)]
        kappa: f64,
        /// Control net size per direction
        #[arg(long, default_value_t = 13)]
        net: usize,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_config(path: &Path, modes: Option<usize>) -> Result<AnalysisConfig, CliError> {
    let mut cfg = AnalysisConfig::load(path)?;
    if let Some(k) = modes {
        cfg.modes = k;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve { config } => {
            let cfg = load_config(&config, cli.modes)?;
            let rows = run_solve(&cfg)?;
            write_rows(output(&cli.out)?, &rows, true)?;
            Ok(EXIT_OK)
        }
        Command::Sweep { config } => {
            let mut sweep = SweepConfig::load(&config)?;
            if let Some(k) = cli.modes {
                sweep.base.modes = k;
                sweep.base.validate()?;
            }
            let result = run_sweep(&sweep, cli.workers)?;
            write_rows(output(&cli.out)?, &result.rows, true)?;
            if result.ok() {
                Ok(EXIT_OK)
            } else {
                log::error!("{} configuration(s) failed", result.failures.len());
                Ok(EXIT_FAILURE)
            }
        }
        Command::Converge { config, nets } => {
            let cfg = load_config(&config, cli.modes)?;
            let rows = run_converge(&cfg, &nets)?;
            write_converge(output(&cli.out)?, &rows)?;
            Ok(EXIT_OK)
        }
        Command::Validate { kappa, net } => {
            if !(kappa > 0.0 && kappa <= 1.0) {
                return Err(CliError::Input(format!("--kappa must lie in (0, 1], got {kappa}")));
            }
            if net < 4 {
                return Err(CliError::Input(format!("--net must be at least 4 for cubic splines, got {net}")));
            }
            let opts = ValidateOptions { kappa, net, workers: cli.workers };
            let report = run_validate(&opts)?;
            report.write_csv(output(&cli.out)?)?;
            for (suite, pass, total) in report.summary() {
                log::info!("{}: {pass}/{total} passed", suite.name());
            }
            if report.passed() {
                Ok(EXIT_OK)
            } else {
                for c in report.failures() {
                    log::warn!("{} {}: expected {} got {:.6} ({:.2}%)", c.suite.name(), c.case, c.expected, c.computed, 100.0 * c.rel_error());
                }
                Ok(EXIT_FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
