//! Experiment drivers behind the `heatgp` binary: kernel estimation,
//! estimator efficiency, raw path dumps and the two regression studies.

mod commands;
pub mod config;
pub mod knot;
mod output;
mod regression;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    base_point, cmd_efficiency, cmd_estimate, cmd_simulate, point_at_distance, strip_eps, ComparisonRow,
    EstimateOutcome,
};
pub use config::{Config, Overrides};
pub use regression::{cmd_knot, cmd_projective, mean_sd, KnotRow, MethodSummary, ProjectiveRow};

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "heatgp", version, about = "Heat-kernel Gaussian processes on manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Number of Brownian paths.
    #[arg(long, global = true)]
    pub paths: Option<usize>,

    /// Random-walk steps up to the largest diffusion time.
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// Strip half-width / ball radius.
    #[arg(long, global = true)]
    pub eps: Option<f64>,

    #[arg(long, global = true)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Estimate the heat kernel by the ball and strip methods.
    Estimate,
    /// Torus-knot regression, intrinsic against extrinsic.
    Knot,
    /// Complex projective regression against embedding baselines.
    Projective,
    /// Strip/ball hit ratios over a ladder of window widths.
    Efficiency,
    /// Dump simulated Brownian endpoints.
    Simulate,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidManifold(_) | Error::InvalidPlan(_) => 2,
        Error::NoHits { .. } | Error::UncoveredPair(_) => 3,
        Error::Numerical(_) | Error::ConstraintViolation { .. } | Error::Projection(_) => 4,
        _ => 1,
    }
}

/// Loads the configuration, applies flag overrides and runs the command.
pub fn run(cli: &Cli) -> crate::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        paths: cli.paths,
        steps: cli.steps,
        eps: cli.eps,
        replicates: cli.replicates,
    })?;
    match cli.command {
        Command::Estimate => cmd_estimate(&cfg).map(|_| ()),
        Command::Knot => cmd_knot(&cfg).map(|(_, s)| print_summary(&s)),
        Command::Projective => cmd_projective(&cfg).map(|(_, s)| print_summary(&s)),
        Command::Efficiency => cmd_efficiency(&cfg).map(|(_, slope)| {
            if let Some(s) = slope {
                println!("log-log slope: {s:.3}");
            }
        }),
        Command::Simulate => cmd_simulate(&cfg),
    }
}

fn print_summary(summary: &[MethodSummary]) {
    for s in summary {
        println!("{:<12} {:<12} {:.4} ({:.4})", s.label, s.method, s.mean_rmse, s.sd_rmse);
    }
}
