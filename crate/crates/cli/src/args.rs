use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "slapmap", version, about = "Ergodic analysis of polygon slap maps")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Uniform Ulam bins per unit of perimeter.
    #[arg(long, global = true, default_value_t = 3000.0)]
    pub bins: f64,
    /// Convergence tolerance for power iteration and Newton's method.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Iteration cap for power iteration and Newton's method.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory for the report, density tables and polygon files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a polygon given as `{"vertices": [[x, y], ...]}`.
    Analyze { file: PathBuf },
    /// Compare predictions and measurements for the regular d-gon.
    Regular { d: usize },
    /// Analyze the triangle with angles a1, a2 and π − a1 − a2 (radians).
    Triangle { a1: f64, a2: f64 },
    /// Renormalization tower of x ↦ a(x − 1/2) mod 1.
    Lorenz { a: f64 },
    /// Doubling orbit of the kite family.
    Kite {
        #[command(subcommand)]
        action: KiteAction,
    },
    /// Build a convex 3n-gon with n ergodic components.
    Nonergodic {
        n: usize,
        /// Rotation centre as a fraction of the altitude from the base.
        #[arg(long, default_value_t = 0.5)]
        pivot: f64,
        /// Apex angles to try, in order.
        #[arg(long, value_delimiter = ',')]
        apex: Option<Vec<f64>>,
    },
}

#[derive(Debug, Subcommand)]
pub enum KiteAction {
    /// Solve for the half-angles carrying the doubling orbit.
    Solve {
        #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], allow_negative_numbers = true)]
        guess: Option<Vec<f64>>,
    },
    /// Perturb the solution and look for split ergodic components.
    Probe {
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], allow_negative_numbers = true)]
        guess: Option<Vec<f64>>,
    },
}
