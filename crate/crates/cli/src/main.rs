//! `swapcorr`: entanglement-swapping correlation experiments from the
//! command line.
//!
//! Subcommands: `correlations`, `swap`, `chain`, `pathways`, `montecarlo`,
//! `gamma-scan`, `verify`. All numeric output uses 17 significant digits and
//! is byte-stable for a fixed configuration; Monte-Carlo subcommands are
//! deterministic in their `--seed` regardless of worker count. The
//! `SWAPCORR_THREADS` environment variable caps the worker pool.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod input;
mod output;

#[derive(Parser)]
#[command(
    name = "swapcorr",
    version,
    about = "Bloch-matrix entanglement-swapping toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum McEnsemble {
    #[value(name = "x-form")]
    XForm,
    General,
}

#[derive(Args)]
struct CorrelationsArgs {
    /// State file (JSON, density or R form).
    #[arg(long, conflicts_with = "family")]
    state: Option<String>,
    /// Named family: werner, bell, coloured-noise, maximally-mixed.
    #[arg(long)]
    family: Option<String>,
    /// Mixing parameter for werner / coloured-noise.
    #[arg(long)]
    p: Option<f64>,
    /// Angle for coloured-noise (radians, [0, pi/4]).
    #[arg(long)]
    theta: Option<f64>,
    /// Bell index for the bell family (0..=3).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct SwapArgs {
    /// AB source: file path or family spec like werner:0.9.
    #[arg(long)]
    ab: String,
    /// CD source: file path or family spec.
    #[arg(long)]
    cd: String,
    /// Effect: Bell index 0..=3 or an effect file.
    #[arg(long, default_value = "0")]
    effect: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ChainArgs {
    /// Chain file: {"sources": [...], "measurements": [...]}.
    #[arg(long)]
    state: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct PathwaysArgs {
    /// Source family (coloured-noise is the scanned family).
    #[arg(long, default_value = "coloured-noise")]
    family: String,
    /// Mixing parameter of the family.
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    /// Number of theta points in [0, pi/4], endpoints included.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Bell projector measured between the sources (0..=3).
    #[arg(long, default_value_t = 2)]
    effect: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct MontecarloArgs {
    #[arg(long, value_enum, default_value = "x-form")]
    ensemble: McEnsemble,
    /// Sample count.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bell projector measured between the sources (0..=3).
    #[arg(long, default_value_t = 2)]
    effect: usize,
    /// CSV destination; stdout when omitted (summary then goes to stderr).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct GammaScanArgs {
    /// Functional parameter: rho33 = alpha - rho22 with rho11 = rho44 =
    /// (1 - alpha)/2.
    #[arg(long)]
    alpha: f64,
    /// Number of rho22 points in [0, alpha], endpoints included.
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Random trials per cross-check family.
    #[arg(long, default_value_t = 100)]
    n_trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Test hook: force the named check to fail.
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation report (B, BF3, D, C, Omega, s, chi) of one state.
    Correlations(CorrelationsArgs),
    /// Single swap: post-swap state, probability and report.
    Swap(SwapArgs),
    /// N-source chain swap from a chain file.
    Chain(ChainArgs),
    /// Coloured-noise theta scan comparing initial/filtered/swapped/SF/FS.
    Pathways(PathwaysArgs),
    /// FS vs SF Monte Carlo over a random ensemble.
    Montecarlo(MontecarloArgs),
    /// Closed-form Gamma coefficients along the case-1 ABD functional.
    GammaScan(GammaScanArgs),
    /// Cross-check the R-picture against the density oracle; exit 1 on any
    /// failure.
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    let result = match cli.command {
        Command::Correlations(args) => commands::correlations(args),
        Command::Swap(args) => commands::swap(args),
        Command::Chain(args) => commands::chain(args),
        Command::Pathways(args) => commands::pathways(args),
        Command::Montecarlo(args) => commands::montecarlo(args),
        Command::GammaScan(args) => commands::gamma_scan(args),
        Command::Verify(args) => commands::verify(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

#[cfg(feature = "parallel")]
fn init_thread_pool() {
    if let Ok(value) = std::env::var("SWAPCORR_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn init_thread_pool() {}
