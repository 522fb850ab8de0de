//! `lambda-scatter`: coefficient tables, output wave functions, landscape
//! sweeps, pulse optimization and oracle cross-checks.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical diagnostic failure,
//! 4 I/O failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use lambda_scatter::optimize::Axis;
use lambda_scatter::{PulseSpec, Resolution};

use commands::CheckFailed;
use config::{load, override_params, parse_axis};

#[derive(Parser)]
#[command(name = "lambda-scatter", version, about = "Few-photon scattering on a waveguide-coupled Lambda atom")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "LAMBDA_SCATTER_THREADS")]
    threads: Option<usize>,
    /// JSON config for the subcommand; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    /// Atomic transition frequency.
    #[arg(long, allow_negative_numbers = true)]
    omega0: Option<f64>,
    /// Radiative decay rate.
    #[arg(long)]
    gamma0: Option<f64>,
    /// Coupling factor: 1 for chiral, 0.5 for symmetric coupling.
    #[arg(long)]
    chirality: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print s, t, |s|^2 and |t|^2 for each detuning.
    Coeffs {
        #[arg(allow_negative_numbers = true)]
        deltas: Vec<f64>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the output wave functions and the pointwise W probability.
    Wavefunction {
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        photons: Option<usize>,
        /// Fixed number of grid points.
        #[arg(long)]
        points: Option<usize>,
        /// Three photons: plane t1 + t2 + t3 = SLICE.
        #[arg(long, allow_negative_numbers = true)]
        slice: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Averaged W probability of Gaussian pulses over a (delta, gamma) lattice.
    Sweep {
        #[arg(long)]
        photons: Option<usize>,
        /// Detuning axis as MIN:MAX:STEPS.
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
        delta: Option<Axis>,
        /// Width axis as MIN:MAX:STEPS.
        #[arg(long, value_parser = parse_axis)]
        gamma: Option<Axis>,
        /// Minimum grid points per cell.
        #[arg(long)]
        min_points: Option<usize>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Refine the Gaussian optimum, then optimize Hermite corrections.
    Optimize {
        #[arg(long)]
        photons: Option<usize>,
        /// Starting point as DELTA,GAMMA.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        start: Option<Vec<f64>>,
        /// Highest Hermite order.
        #[arg(long)]
        n_max: Option<usize>,
        /// Stop after the Gaussian refinement.
        #[arg(long)]
        gaussian_only: bool,
        /// Iteration cap of the shape stage.
        #[arg(long)]
        max_iters: Option<u64>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare the time-domain construction against the S-matrix oracles.
    OracleCheck {
        /// Time-grid points of the two-photon comparison.
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn configure_threads(cli: Option<usize>, config: Option<usize>) -> Result<()> {
    if let Some(n) = cli.or(config) {
        if n == 0 {
            anyhow::bail!(lambda_scatter::Error::InvalidParams("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let path = cli.config.as_deref();
    match cli.command {
        Command::Coeffs { deltas, params, output } => {
            let mut cfg: config::CoeffsConfig = load(path)?;
            cfg.params = override_params(cfg.params, params.omega0, params.gamma0, params.chirality)?;
            if !deltas.is_empty() {
                cfg.deltas = deltas;
            }
            cfg.output = output.or(cfg.output);
            configure_threads(cli.threads, cfg.threads)?;
            commands::coeffs(&cfg)
        }
        Command::Wavefunction {
            delta,
            gamma,
            photons,
            points,
            slice,
            params,
            output,
        } => {
            let mut cfg: config::WavefunctionConfig = load(path)?;
            cfg.params = override_params(cfg.params, params.omega0, params.gamma0, params.chirality)?;
            if delta.is_some() || gamma.is_some() {
                cfg.pulse = PulseSpec {
                    delta: delta.unwrap_or(cfg.pulse.delta),
                    gamma: gamma.unwrap_or(cfg.pulse.gamma),
                    hermite: cfg.pulse.hermite,
                };
            }
            cfg.photons = photons.unwrap_or(cfg.photons);
            if let Some(n) = points {
                cfg.resolution = Resolution::Points(n);
            }
            cfg.slice = slice.unwrap_or(cfg.slice);
            cfg.output = output.or(cfg.output);
            configure_threads(cli.threads, cfg.threads)?;
            commands::wavefunction(&cfg)
        }
        Command::Sweep {
            photons,
            delta,
            gamma,
            min_points,
            params,
            output,
        } => {
            let mut cfg: config::SweepConfig = load(path)?;
            cfg.params = override_params(cfg.params, params.omega0, params.gamma0, params.chirality)?;
            cfg.photons = photons.unwrap_or(cfg.photons);
            cfg.delta = delta.unwrap_or(cfg.delta);
            cfg.gamma = gamma.unwrap_or(cfg.gamma);
            if let Some(n) = min_points {
                cfg.resolution = Some(Resolution::AtLeast(n));
            }
            cfg.output = output.or(cfg.output);
            configure_threads(cli.threads, cfg.threads)?;
            commands::sweep_cmd(&cfg)
        }
        Command::Optimize {
            photons,
            start,
            n_max,
            gaussian_only,
            max_iters,
            params,
            output,
        } => {
            let mut cfg: config::OptimizeConfig = load(path)?;
            cfg.params = override_params(cfg.params, params.omega0, params.gamma0, params.chirality)?;
            cfg.photons = photons.unwrap_or(cfg.photons);
            if let Some(s) = start {
                cfg.start = [s[0], s[1]];
            }
            cfg.n_max = n_max.unwrap_or(cfg.n_max);
            cfg.gaussian_only |= gaussian_only;
            if let Some(m) = max_iters {
                cfg.shape.max_iters = m;
            }
            cfg.output = output.or(cfg.output);
            configure_threads(cli.threads, cfg.threads)?;
            commands::optimize(&cfg)
        }
        Command::OracleCheck { points, params, output } => {
            let mut cfg: config::OracleCheckConfig = load(path)?;
            cfg.params = override_params(cfg.params, params.omega0, params.gamma0, params.chirality)?;
            cfg.points = points.unwrap_or(cfg.points);
            cfg.output = output.or(cfg.output);
            configure_threads(cli.threads, cfg.threads)?;
            commands::oracle_check(&cfg)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<lambda_scatter::Error>() {
            return if e.is_numerical() { 3 } else { 2 };
        }
        if cause.is::<CheckFailed>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<serde_json::Error>() {
            return if e.is_io() { 4 } else { 2 };
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            if e.is_io_error() {
                return 4;
            }
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
