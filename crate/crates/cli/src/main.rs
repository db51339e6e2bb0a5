//! `debranges`: reproducible experiments on entire solutions, de Branges
//! spaces and spectral measures of Schrödinger operators.

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{AsymptoticsArgs, Context, MeasureFormat};
use config::{ExperimentConfig, KernelGrid};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "debranges", version, about)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Relative tolerance of the ODE solver.
    #[arg(long, global = true, value_name = "REL")]
    tol: Option<f64>,

    /// Spectral cutoff, overriding the configuration.
    #[arg(long = "lambda-max", global = true, value_name = "N")]
    lambda_max: Option<f64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Seed of all random probes.
    #[arg(long, global = true, value_name = "N", default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Diagonal,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and weights up to the cutoff.
    Spectrum {
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Reproducing kernel by the closed formula and by quadrature.
    Kernel {
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum)]
        grid: Option<GridArg>,
    },
    /// Transforms of seeded probe functions on the spectrum.
    Transform,
    /// Parseval, Hermite–Biehler, kernel, nesting and asymptotics suites.
    Verify,
    /// Compares the operator with `second_operator`.
    Uniqueness,
    /// Large-|z| behaviour of phi(iy, x) / phi(iy, x_ref).
    Asymptotics {
        #[arg(long)]
        x: Option<f64>,
        #[arg(long = "x-ref")]
        x_ref: Option<f64>,
        #[arg(long = "y-min", default_value_t = 1e3)]
        y_min: f64,
        #[arg(long = "y-max", default_value_t = 1e4)]
        y_max: f64,
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(t) = cli.tol {
        cfg.tolerances.rel = t;
    }
    if let Some(l) = cli.lambda_max {
        cfg.lambda_max = l;
    }
    cfg.validate()?;
    let ctx = Context { cfg, out: cli.out, seed: cli.seed };
    match cli.command {
        Command::Spectrum { format } => commands::spectrum(
            &ctx,
            match format {
                FormatArg::Json => MeasureFormat::Json,
                FormatArg::Csv => MeasureFormat::Csv,
            },
        ),
        Command::Kernel { c, grid } => commands::kernel(
            &ctx,
            c,
            grid.map(|g| match g {
                GridArg::Diagonal => KernelGrid::Diagonal,
                GridArg::Random => KernelGrid::Random,
            }),
        ),
        Command::Transform => commands::transform(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Uniqueness => commands::uniqueness(&ctx),
        Command::Asymptotics { x, x_ref, y_min, y_max, steps } => {
            commands::asymptotics(&ctx, &AsymptoticsArgs { x, x_ref, y_min, y_max, steps })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
