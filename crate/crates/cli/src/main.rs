//! `manipyr`: command-line front end for pyramid transforms of real- and
//! manifold-valued sequences.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "manipyr",
    version,
    about = "Pyramid transforms with pseudo-reversed decimation"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Experiment config (JSON); missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pseudo-reversing parameter ξ.
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    /// Number of pyramid layers.
    #[arg(long, global = true)]
    pub layers: Option<usize>,
    /// Refinement mask: least-squares, four-point, linear, cubic, bspline-N.
    #[arg(long, global = true)]
    pub mask: Option<String>,
    /// Root displacement mode: on-circle or outside-circle.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Output file; `.csv` selects CSV where both formats exist. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand)]
pub enum Command {
    /// Roots, κ, decimation kernel and a ξ-sweep of a mask's even symbol.
    Symbol(SweepRange),
    /// κ, mask perturbation, ‖γ‖₁ and convolutional error over a range of ξ.
    SweepXi(SweepRange),
    /// Linear pyramid of a sequence file (CSV `index,value` or JSON).
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Reconstruct a sequence from a linear pyramid, optionally thresholding first.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        /// full, zero-even, keep:<fraction> or abs:<threshold>.
        #[arg(long, default_value = "full")]
        policy: String,
    },
    /// Manifold pyramid of a curve file.
    MAnalyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Reconstruct a curve from a manifold pyramid.
    MSynthesize {
        #[arg(long)]
        input: PathBuf,
        /// Zero every even-indexed detail before synthesis.
        #[arg(long)]
        zero_even: bool,
    },
    /// Keep only the largest detail vectors across all layers and report the error.
    Compress {
        #[arg(long)]
        input: PathBuf,
        /// Fraction of detail vectors kept.
        #[arg(long)]
        keep: Option<f64>,
        /// Also write the thresholded pyramid here.
        #[arg(long)]
        pyramid_out: Option<PathBuf>,
    },
    /// Enlarge the largest detail vectors of each layer and synthesize.
    Enhance {
        #[arg(long)]
        input: PathBuf,
        /// Fraction of detail vectors scaled in each layer.
        #[arg(long)]
        top: Option<f64>,
        /// Relative enlargement; vectors are multiplied by 1 + gain.
        #[arg(long)]
        gain: Option<f64>,
    },
    /// Generate experiment data.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
    },
    /// Reproduce a table (1 to 4) as CSV.
    Table { id: u32 },
    /// Plot-ready CSV for a figure.
    Figure {
        #[arg(value_enum)]
        kind: FigureKind,
        /// Pyramid file for the detail figures.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
pub struct SweepRange {
    #[arg(long, default_value_t = 0.1)]
    pub from: f64,
    #[arg(long, default_value_t = 1.4)]
    pub to: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GenKind {
    /// Morlet wavelet samples.
    Morlet,
    /// Morlet samples with seeded Gaussian noise.
    NoisyMorlet,
    /// Smooth random rotation curve.
    So3,
    /// Rotation curve carried along a cone.
    Se3,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FigureKind {
    /// Roots of the even symbol before and after displacement.
    Roots,
    /// Decimation coefficients.
    Gamma,
    /// Basic limit functions of the approximate masks.
    Limits,
    /// Convolutional error and mask perturbation against ξ.
    Residual,
    /// Detail magnitudes of a linear pyramid.
    LinearDetails,
    /// Detail norms of a manifold pyramid.
    ManifoldDetails,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match commands::run(&cli.global, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
