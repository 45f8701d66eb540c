//! `cnls`: configuration-driven experiments for the confined NLS.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use confined_nls::diagnostics::Outcome;
use confined_nls::model::parse_rational;
use confined_nls::{ModelParams, Sign};

use crate::config::ExperimentConfig;

/// A configuration or input problem; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 2;

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::GlobalScattering => 0,
        Outcome::FiniteTimeBlowup => 10,
        Outcome::GrowAlongSequence => 11,
        Outcome::Undetermined => 12,
        Outcome::OutOfScope => 13,
    }
}

#[derive(Parser, Debug)]
#[command(name = "cnls", version, about = "Spectral experiments for NLS with partial harmonic confinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args, Debug, Clone)]
struct BetaArgs {
    /// Threshold value to use directly.
    #[arg(long, conflicts_with = "ground_state")]
    beta: Option<f64>,
    /// A stored ground state whose summary carries β; must match the config grid and model.
    #[arg(long)]
    ground_state: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepParam {
    Amplitude,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the ground state Q and the threshold β.
    GroundState {
        #[command(flatten)]
        common: Common,
        /// Skip the constrained-minimum cross-check.
        #[arg(long)]
        no_cross_check: bool,
    },
    /// Place a stored state in K+, K- or neither.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Field file to classify.
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        beta: BetaArgs,
    },
    /// Evolve the configured initial state and judge the outcome.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        beta: BetaArgs,
    },
    /// Evolve a family of initial states and locate the change of outcome.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "amplitude")]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Refine the outcome change by bisection down to this width.
        #[arg(long)]
        bisect: Option<f64>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        beta: BetaArgs,
    },
    /// Print the exact exponent set and its checks.
    Exponents {
        /// Read d, n and sigma from this config instead of the flags.
        #[arg(long, conflicts_with_all = ["d", "n", "sigma"])]
        config: Option<PathBuf>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        /// Rational, e.g. 3/2.
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the decay exponent of the free flow in L^(2 sigma + 2).
    LinearDecay {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5.0)]
        t_lo: f64,
        #[arg(long, default_value_t = 50.0)]
        t_hi: f64,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn exponent_params(config: Option<&Path>, d: Option<u32>, n: Option<u32>, sigma: Option<&str>) -> Result<ModelParams> {
    if let Some(path) = config {
        return Ok(ExperimentConfig::load(path)?.model);
    }
    let (Some(d), Some(sigma)) = (d, sigma) else {
        return Err(Invalid("exponents needs --config or --d and --sigma".into()).into());
    };
    let sigma = parse_rational(sigma).map_err(|e| Invalid(e.to_string()))?;
    ModelParams::new(d, n.unwrap_or(1), sigma, Sign::Focusing).map_err(|e| Invalid(e.to_string()).into())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::GroundState { common, no_cross_check } => {
            let (cfg, out) = load(&common)?;
            print_json(&commands::run_ground_state(&cfg, &out, !no_cross_check)?)?;
            Ok(0)
        }
        Command::Classify { common, state, beta } => {
            let (cfg, out) = load(&common)?;
            let report = commands::run_classify(&cfg, &state, beta.beta, beta.ground_state.as_deref())?;
            std::fs::create_dir_all(&out)?;
            output::write_json(&out.join("classification.json"), &report)?;
            print_json(&report)?;
            Ok(0)
        }
        Command::Evolve { common, beta } => {
            let (cfg, out) = load(&common)?;
            let run = commands::run_evolve(&cfg, &out, beta.beta, beta.ground_state.as_deref())?;
            print_json(&run.verdict)?;
            Ok(outcome_code(run.verdict.outcome))
        }
        Command::Sweep { common, param: SweepParam::Amplitude, from, to, steps, bisect, jobs, beta } => {
            let (cfg, out) = load(&common)?;
            let req = commands::SweepRequest { from, to, steps, bisect_width: bisect, jobs };
            let result = commands::run_sweep(&cfg, &out, &req, beta.beta, beta.ground_state.as_deref())?;
            print_json(&result)?;
            Ok(if result.inconclusive { outcome_code(Outcome::Undetermined) } else { 0 })
        }
        Command::Exponents { config, d, n, sigma, out } => {
            let params = exponent_params(config.as_deref(), d, n, sigma.as_deref())?;
            let report = commands::run_exponents(params)?;
            if let Some(out) = out {
                std::fs::create_dir_all(&out)?;
                output::write_json(&out.join("exponents.json"), &report)?;
            }
            print_json(&report)?;
            Ok(0)
        }
        Command::LinearDecay { common, t_lo, t_hi, count } => {
            let (cfg, out) = load(&common)?;
            print_json(&commands::run_linear_decay(&cfg, &out, t_lo, t_hi, count)?)?;
            Ok(0)
        }
    }
}

fn is_validation(e: &anyhow::Error) -> bool {
    use confined_nls::Error as E;
    e.chain().any(|c| {
        c.is::<Invalid>()
            || matches!(
                c.downcast_ref::<E>(),
                Some(E::InvalidParams(_) | E::InvalidGrid(_) | E::Mismatch(_) | E::OutOfWindow(_) | E::Format(_))
            )
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
