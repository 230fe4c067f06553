//! Thin command-line front end; all work happens in `bgchaos::cli`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bgchaos::cli::{self, BoundConfig, ConvergeConfig, CumulantsConfig, SteinConfig};
use bgchaos::error::Result;

#[derive(Parser)]
#[command(
    name = "bgchaos",
    about = "Bilateral-gamma approximation experiments on the second Wiener chaos",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and estimated cumulants of a target law and/or chaos kernel.
    Cumulants(CumulantsArgs),
    /// Evaluate a closed-form error bound, optionally with an MC bracket.
    Bound(BoundArgs),
    /// Characterizing-identity residuals and the Stein-equation solver.
    Stein(SteinArgs),
    /// Convergence trajectories (bound, Wasserstein-1, dictionary bound).
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct CumulantsArgs {
    /// Target parameters alpha1,p1,alpha2,p2
    #[arg(long)]
    bg: Option<String>,
    /// Kernel file (plain-text matrix format)
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Spectrum literal l1,l2,...
    #[arg(long)]
    spectrum: Option<String>,
    /// Pairwise U-statistic table of this size
    #[arg(long)]
    ustat: Option<usize>,
    /// Monte Carlo sample count for estimated columns
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Batch count for batch-means standard errors
    #[arg(long, default_value_t = 32)]
    batches: usize,
    /// Output JSON path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; its fields override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    /// bg | bg-mc | vg | svg | laplace | normal | gamma | decomposed | homog
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    bg: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    spectrum: Option<String>,
    #[arg(long)]
    ustat: Option<usize>,
    /// gaussian | rademacher | uniform
    #[arg(long)]
    innovation: Option<String>,
    /// Sample count for the dictionary lower bound / Wasserstein-1 bracket
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SteinArgs {
    /// Target parameters alpha1,p1,alpha2,p2
    #[arg(long)]
    bg: Option<String>,
    /// Only run the characterizing-identity residual table
    #[arg(long)]
    identity_only: bool,
    #[arg(long, default_value_t = 4096)]
    grid_size: usize,
    #[arg(long, default_value_t = 64)]
    time_nodes: usize,
    /// Gauss-Laguerre nodes for jump integrals
    #[arg(long, default_value_t = 64)]
    quad_nodes: usize,
    /// Monte Carlo samples per identity residual
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for solved f_h grids as CSV
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// bg-interp | clt | ustat
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    bg: Option<String>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long, default_value_t = 5)]
    checkpoints: usize,
    /// CLT levels, comma separated
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// U-statistic sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    innovation: Option<String>,
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory CSV path (inlined into the JSON report when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Cumulants(args) => {
            let mut cfg = CumulantsConfig {
                bg: args.bg,
                kernel: args.kernel,
                spectrum: args.spectrum,
                ustat: args.ustat,
                mc: args.mc,
                seed: args.seed,
                batches: args.batches,
                out: args.out,
            };
            if let Some(path) = &args.config {
                cfg = cli::apply_config_file(cfg, path)?;
            }
            let report = cli::run_cumulants(&cfg)?;
            cli::emit(&report, &cfg.out)
        }
        Command::Bound(args) => {
            let mut cfg = BoundConfig {
                variant: args.variant,
                bg: args.bg,
                alpha: args.alpha,
                alpha1: args.alpha1,
                alpha2: args.alpha2,
                p: args.p,
                sigma2: args.sigma2,
                kernel: args.kernel,
                spectrum: args.spectrum,
                ustat: args.ustat,
                innovation: args.innovation,
                mc: args.mc,
                seed: args.seed,
                out: args.out,
            };
            if let Some(path) = &args.config {
                cfg = cli::apply_config_file(cfg, path)?;
            }
            let report = cli::run_bound(&cfg)?;
            cli::emit(&report, &cfg.out)
        }
        Command::Stein(args) => {
            let mut cfg = SteinConfig {
                bg: args.bg,
                identity_only: args.identity_only,
                grid_size: args.grid_size,
                time_nodes: args.time_nodes,
                quad_nodes: args.quad_nodes,
                samples: args.samples,
                seed: args.seed,
                out: args.out,
                csv_dir: args.csv_dir,
            };
            if let Some(path) = &args.config {
                cfg = cli::apply_config_file(cfg, path)?;
            }
            let report = cli::run_stein(&cfg)?;
            cli::emit(&report, &cfg.out)
        }
        Command::Converge(args) => {
            let mut cfg = ConvergeConfig {
                mode: args.mode,
                bg: args.bg,
                sigma2: args.sigma2,
                checkpoints: args.checkpoints,
                levels: args.levels.unwrap_or_else(|| vec![1, 4, 16, 64]),
                sizes: args.sizes.unwrap_or_else(|| vec![10, 20, 40, 80, 160, 320]),
                innovation: args.innovation,
                mc: args.mc,
                seed: args.seed,
                out: args.out,
            };
            if let Some(path) = &args.config {
                cfg = cli::apply_config_file(cfg, path)?;
            }
            let report = cli::run_converge(&cfg)?;
            // Trajectory CSV already went to `out`; the JSON summary goes to
            // stdout either way.
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
