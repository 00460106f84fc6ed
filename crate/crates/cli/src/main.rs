//! `tmsm`: exact characteristic functions, dependence rates and Monte Carlo
//! experiments for tempered multistable and multifractional stable motions.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 failed verification.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_ASSERTION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "tmsm", version, about = "Tempered multistable / multifractional stable motion toolkit")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "TMSM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpecArg {
    /// Process spec: a JSON file path, or inline JSON starting with '{'
    #[arg(long)]
    pub spec: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutArg {
    /// Data file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate sample paths at given times
    Simulate(SimulateArgs),
    /// Exact characteristic function of (X(t_1), ..., X(t_d))
    Cf(CfArgs),
    /// Quasi-norm of an increment, or the Hölder slope of the increment quasi-norm
    Quasinorm(QuasinormArgs),
    /// Dependence measure of the noise over a lag sweep, with a rate fit
    Dependence(DependenceArgs),
    /// Partial sums of |R(n)| for several tempering rates
    Semilrd(SemiLrdArgs),
    /// Time/tempering scaling identity
    Scaling(ScalingArgs),
    /// Small-lag moment limit and Monte Carlo moments
    Moments(MomentsArgs),
    /// Tail probabilities of increments
    Tail(TailArgs),
    /// CF distance of rescaled increments to the tangent process
    Localize(LocalizeArgs),
    /// Hölder exponent estimates from simulated paths
    Holder(HolderArgs),
    /// Run the acceptance criteria
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    /// Evaluation times, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub times: Vec<f64>,
    /// Base cell width
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Refinement factor within the refine radius of each time and of 0
    #[arg(long, default_value_t = 16)]
    pub refine: u32,
    #[arg(long, default_value_t = 1.0)]
    pub refine_radius: f64,
    /// Left cut L (grid starts at -L); derived from --tail-tol when omitted
    #[arg(long)]
    pub cut: Option<f64>,
    /// Kernel mass allowed left of the grid when --cut is omitted
    #[arg(long, default_value_t = 1e-4)]
    pub tail_tol: f64,
    /// Width growth per unit distance outside the refined zones (0 disables)
    #[arg(long, default_value_t = 0.05)]
    pub grading: f64,
    #[arg(long, default_value_t = 1.0)]
    pub max_step: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Difference into the unit-lag noise Y(t) = X(t+1) - X(t)
    #[arg(long)]
    pub noise: bool,
    /// csv, json or binary
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    /// Times, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// One theta per time, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    /// Also tabulate the CF along s·theta for s in [-S, S] with N points: "S,N"
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QuasinormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v: f64,
    /// Fit the slope of ln ‖X(t+δ) - X(t)‖ against ln δ instead
    #[arg(long)]
    pub slope: bool,
    /// Increments δ for --slope, comma separated (default 7 points from 1e-5 to 1e-2)
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DependenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t1: f64,
    /// Lags, comma separated (default 24 geometric lags from 20 to 400)
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub theta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Check the fit against the exponent bands of a varying stability index
    #[arg(long)]
    pub band: bool,
    #[arg(long, default_value_t = 0.005)]
    pub rate_slack: f64,
    #[arg(long, default_value_t = 0.05)]
    pub power_slack: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SemiLrdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub theta2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long)]
    pub c: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.25,2", allow_negative_numbers = true)]
    pub times: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,-0.5,0.8", allow_negative_numbers = true)]
    pub thetas: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Small lag of the Monte Carlo check
    #[arg(long, default_value_t = 1e-3)]
    pub r: f64,
    /// Lags |t - v| >= 1 of the moment-bound sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub sweep: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest accepted relative gap between the Monte Carlo moment and the limit
    #[arg(long, default_value_t = 0.10)]
    pub gate: f64,
    /// Exit 4 when a verdict fails
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TailArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Increment lags |t - v|, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.4")]
    pub lags: Vec<f64>,
    /// Levels y, comma separated (default 12 geometric levels from 0.5 to 50)
    #[arg(long, value_delimiter = ',')]
    pub ys: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest accepted ratio between fitted tail constants across lags
    #[arg(long, default_value_t = 10.0)]
    pub max_spread: f64,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LocalizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub u: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1", allow_negative_numbers = true)]
    pub v: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2", allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01,0.001,0.0001")]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest accepted distance at the smallest scale
    #[arg(long, default_value_t = 1e-3)]
    pub gate: f64,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HolderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    /// Dyadic level n: paths sampled at 2^n + 1 points on [t0, t0 + 1]
    #[arg(long, default_value_t = 12)]
    pub level: u32,
    /// Independent paths
    #[arg(long, default_value_t = 3)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also report the discrete supremum over refining grids
    #[arg(long)]
    pub sup_growth: bool,
    /// Claimed lower bound on the exponent; the verdict requires every estimate above it minus --slack
    #[arg(long)]
    pub expect: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub slack: f64,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// Halve path counts, double tolerances
    #[arg(long)]
    pub fast: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with {"fast": bool, "seed": int}; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Subset of criteria, comma separated
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Cf(a) => commands::cf(a),
        Command::Quasinorm(a) => commands::quasinorm(a),
        Command::Dependence(a) => commands::dependence(a),
        Command::Semilrd(a) => commands::semilrd(a),
        Command::Scaling(a) => commands::scaling(a),
        Command::Moments(a) => commands::moments(a),
        Command::Tail(a) => commands::tail(a),
        Command::Localize(a) => commands::localize(a),
        Command::Holder(a) => commands::holder(a),
        Command::VerifyAll(a) => commands::verify_all(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
