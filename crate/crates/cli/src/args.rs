use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "sqrtwiener",
    version,
    about = "Square-root Wiener process experiments"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of paths [default: 20000]
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Steps per path [default: 1000]
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Time step [default: 0.001]
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Scale factor μ0 [default: 0.5]
    #[arg(long, global = true)]
    pub mu0: Option<f64>,
    /// Drift constant β; needs μ0 = 0.5 when nonzero [default: 0]
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Master seed [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory [default: $SQRTWIENER_OUTPUT_DIR or ./sqrtwiener-out]
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// JSON file with any of the run configuration fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write large ensemble CSVs uncompressed
    #[arg(long, global = true)]
    pub no_compress: bool,
}

impl CommonArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            n_paths: self.paths,
            n_steps: self.steps,
            dt: self.dt,
            mu0: self.mu0,
            beta: self.beta,
            seed: self.seed,
            output_dir: self.output.clone(),
            no_compress: self.no_compress,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Simulate the square-root process and write its increments
    Simulate(SimulateArgs),
    /// Means, variances and diffusion coefficients of both processes
    Table1,
    /// Heat and Schrödinger kernels, Wick rotation, empirical histograms
    Kernels(KernelArgs),
    /// Solve the complex Fokker–Planck equation by Crank–Nicolson
    Fpsolve(FpArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Table1 => "table1",
            Command::Kernels(_) => "kernels",
            Command::Fpsolve(_) => "fpsolve",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// Write only the first N paths to the ensemble CSV
    #[arg(long, value_name = "N")]
    pub write_paths: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WickSource {
    /// Squares `X(T)²` of the simulated square-root process
    SquaredValues,
    /// The values `X(T)` themselves
    Values,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel time
    #[arg(long = "t", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = -5.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    /// Points of the analytic curves
    #[arg(long, default_value_t = 1001)]
    pub x_points: usize,
    /// Random (x, t) points for the Wick identity check
    #[arg(long, default_value_t = 10_000)]
    pub identity_points: usize,
    /// Histogram bins [default: Sturges' rule]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Complex samples fed to the sample-level Wick rotation
    #[arg(long, value_enum, default_value_t = WickSource::SquaredValues)]
    pub wick_source: WickSource,
}

impl Default for KernelArgs {
    fn default() -> Self {
        Self {
            t: 1.0,
            x_min: -5.0,
            x_max: 5.0,
            x_points: 1001,
            identity_points: 10_000,
            bins: None,
            wick_source: WickSource::SquaredValues,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FpMode {
    /// μ = (1+i)/2 − β(1−i)/2, D = −i/4
    SquareRoot,
    /// μ = 0, D = 1
    Heat,
    /// μ = 0, D = −i/4
    Schrodinger,
}

#[derive(Debug, Clone, Args)]
pub struct FpArgs {
    #[arg(long, value_enum, default_value_t = FpMode::SquareRoot)]
    pub mode: FpMode,
    /// Center of the initial packet
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Width of the initial packet exp(−(x − x0)²/(2 s0²))
    #[arg(long, default_value_t = 0.5)]
    pub s0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub t_final: f64,
    /// Grid points of the main evolution
    #[arg(long, default_value_t = sqrtwiener::kernels::DEFAULT_POINTS)]
    pub points: usize,
    /// Time steps of the main evolution
    #[arg(long, default_value_t = 200)]
    pub time_steps: usize,
    /// Times at which profiles are written [default: t-final]
    #[arg(long, value_delimiter = ',')]
    pub profile_times: Vec<f64>,
    /// Grid points of the coarsest convergence level
    #[arg(long, default_value_t = 257)]
    pub base_points: usize,
    /// Time steps of the coarsest convergence level
    #[arg(long, default_value_t = 25)]
    pub base_steps: usize,
    /// Refinement levels; 0 skips the convergence study
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
}

impl Default for FpArgs {
    fn default() -> Self {
        Self {
            mode: FpMode::SquareRoot,
            x0: 0.0,
            s0: 0.5,
            t_final: 0.1,
            points: sqrtwiener::kernels::DEFAULT_POINTS,
            time_steps: 200,
            profile_times: Vec::new(),
            base_points: 257,
            base_steps: 25,
            levels: 4,
        }
    }
}
