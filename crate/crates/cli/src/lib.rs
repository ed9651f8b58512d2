//! Subcommands of the `fofreg` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fofreg_core::io::SliceAxis;
use fofreg_core::{Estimator, FofError, Result};

mod fit;
mod simulate;

pub use fit::{parse_cv_range, parse_truncation};

#[derive(Parser, Debug)]
#[command(
    name = "fofreg",
    version,
    about = "Function-on-function linear regression with functional principal components"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the coefficient surface from paired curve files.
    Fit(FitArgs),
    /// Leave-one-out cross-validation over a range of truncations.
    Cv(CvArgs),
    /// Extract a one-dimensional slice of a surface CSV.
    Slice(SliceArgs),
    /// Monte Carlo study of the estimators on simulated data.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Predictor curves: header row of grid points, one curve per row.
    #[arg(long, value_name = "FILE")]
    pub x: PathBuf,

    /// Response curves on the same grid as the predictors.
    #[arg(long, value_name = "FILE")]
    pub y: PathBuf,

    /// Resample both files onto a uniform grid of this many points.
    #[arg(long, value_name = "N")]
    pub grid_size: Option<usize>,

    #[arg(long, value_name = "single|double", default_value = "single", value_parser = parse_estimator)]
    pub estimator: Estimator,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Number of components, `M` or `M1,M2`.
    #[arg(
        long,
        value_name = "M[,M2]",
        conflicts_with = "cv",
        required_unless_present = "cv"
    )]
    pub truncation: Option<String>,

    /// Choose the truncation by cross-validation over `A-B` (or a single `A`).
    #[arg(long, value_name = "RANGE")]
    pub cv: Option<String>,

    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Candidate truncations `A-B` (or a single `A`); pairs over the square
    /// for the double estimator.
    #[arg(long, value_name = "RANGE")]
    pub cv: String,

    /// Also write cv_scores.csv and metadata.txt here.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SliceArgs {
    #[arg(long, value_name = "FILE")]
    pub surface: PathBuf,

    /// `s` fixes the first argument, `t` the second.
    #[arg(long, value_name = "s|t", value_parser = parse_axis)]
    pub axis: SliceAxis,

    /// Position on the surface's native axis.
    #[arg(long, value_name = "VALUE", allow_negative_numbers = true)]
    pub at: f64,

    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// key=value study configuration.
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,

    /// Overrides the config's seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Overrides the config's output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn parse_estimator(s: &str) -> std::result::Result<Estimator, String> {
    s.parse().map_err(|e: FofError| e.to_string())
}

fn parse_axis(s: &str) -> std::result::Result<SliceAxis, String> {
    s.parse().map_err(|e: FofError| e.to_string())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => fit::fit(&args),
        Command::Cv(args) => fit::cv(&args),
        Command::Slice(args) => fit::slice(&args),
        Command::Simulate(args) => simulate::simulate(&args),
    }
}

/// Builds the global worker pool from `FOFREG_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FOFREG_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        FofError::Config(format!(
            "FOFREG_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| FofError::Config(format!("cannot start {threads} worker threads: {e}")))
}
