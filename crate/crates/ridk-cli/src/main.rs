//! Command-line experiment runner for the RIDK numerical laboratory.
//!
//! Every subcommand assembles a [`SimConfig`] (file values first, flags
//! override), validates it, runs the experiment, and writes `rows.csv`,
//! `checks.csv`, `summary.json`, plus plot data under the output directory.
//! Exit code 0 means every pass/fail flag passed.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ridk::config::{ExperimentKind, SimConfig};
use ridk::experiments;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ridk",
    version,
    about = "Numerical laboratory for the RIDK model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON configuration file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; replica seeds are derived deterministically from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of Monte Carlo replicas.
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct ModelOpts {
    /// Spatial dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Regularity index s (alternative: --eta).
    #[arg(long)]
    s: Option<f64>,
    /// Offset eta with s = d/2 + eta.
    #[arg(long)]
    eta: Option<f64>,
    /// Friction coefficient.
    #[arg(long)]
    gamma: Option<f64>,
    /// Noise amplitude.
    #[arg(long)]
    sigma: Option<f64>,
    /// Regularisation / exit threshold delta.
    #[arg(long)]
    delta: Option<f64>,
    /// Cosine interaction amplitude (0 = free particles).
    #[arg(long)]
    u0: Option<f64>,
    /// Grid points per axis (power of two).
    #[arg(long)]
    m: Option<usize>,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Horizon T.
    #[arg(long = "t")]
    horizon: Option<f64>,
    /// Exit-monitor norm radius k.
    #[arg(long)]
    k: Option<f64>,
    /// Initial-density cosine amplitude.
    #[arg(long)]
    ic_amplitude: Option<f64>,
    /// Steps between field snapshots.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the per-axis covariance eigenvalues and Sobolev weights.
    Spectrum {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        /// Comma-separated particle widths.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Fit the weighted trace against 1/eps and check the exponent calculus.
    TraceScaling {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Integrate the Langevin particle system.
    SimulateParticles {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Particle count.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Integrate the density/momentum SPDE.
    SimulateRidk {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Run particles and SPDE from matched initial data and track distance.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Vanishing-noise convergence along eps = N^{-1/theta}.
    Convergence {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long)]
        theta: Option<f64>,
        /// Comma-separated particle counts.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Micro/meso fluctuation-scaling statistic.
    MicroScaling {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        model: ModelOpts,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        /// Pin widths explicitly instead of the critical coupling.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Verify the combinatorial identities and report max residuals.
    VerifyAppendix {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn base_config(kind: ExperimentKind, common: &CommonOpts) -> Result<SimConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let cfg = SimConfig::from_json(&text)?;
            anyhow::ensure!(
                cfg.experiment == kind,
                "config file is for `{}`, subcommand is `{}`",
                cfg.experiment.name(),
                kind.name()
            );
            cfg
        }
        None => SimConfig::new(kind),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(replicas) = common.replicas {
        cfg.replicas = replicas;
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    Ok(cfg)
}

fn apply_model(cfg: &mut SimConfig, model: &ModelOpts) {
    if let Some(v) = model.d {
        cfg.dim = v;
    }
    if let Some(v) = model.s {
        cfg.sobolev_s = Some(v);
    }
    if let Some(v) = model.eta {
        cfg.eta = Some(v);
    }
    if let Some(v) = model.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = model.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = model.delta {
        cfg.delta = v;
    }
    if let Some(v) = model.u0 {
        cfg.u0 = v;
    }
    if let Some(v) = model.m {
        cfg.grid_points = v;
    }
    if let Some(v) = model.dt {
        cfg.dt = v;
    }
    if let Some(v) = model.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = model.k {
        cfg.exit_radius = v;
    }
    if let Some(v) = model.ic_amplitude {
        cfg.ic_amplitude = v;
    }
    if let Some(v) = model.stride {
        cfg.snapshot_stride = v;
    }
}

fn main() {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(all_pass) => std::process::exit(if all_pass { 0 } else { 1 }),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let (cfg, out) = build_config(cli)?;
    cfg.validate()?;
    let report = experiments::run_and_write(&cfg, &out)?;
    for fit in &report.fits {
        println!(
            "[{}] {}: value {:.6} vs reference {:.6} (tol {}{})",
            if fit.pass { "pass" } else { "FAIL" },
            fit.name,
            fit.value,
            fit.reference,
            fit.tolerance,
            if fit.relative { " rel" } else { "" },
        );
    }
    for check in &report.checks {
        println!(
            "[{}] {}: value {:.3e} threshold {:.3e}",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.value,
            check.threshold,
        );
    }
    println!(
        "{} rows written to {}",
        report.rows.len(),
        out.join("rows.csv").display()
    );
    Ok(report.all_pass())
}

fn build_config(cli: Cli) -> Result<(SimConfig, PathBuf)> {
    use Command::*;
    Ok(match cli.command {
        Spectrum { common, model, eps } => {
            let mut cfg = base_config(ExperimentKind::Spectrum, &common)?;
            apply_model(&mut cfg, &model);
            if !eps.is_empty() {
                cfg.eps_values = eps;
            }
            (cfg, common.out)
        }
        TraceScaling { common, model, eps } => {
            let mut cfg = base_config(ExperimentKind::TraceScaling, &common)?;
            apply_model(&mut cfg, &model);
            if !eps.is_empty() {
                cfg.eps_values = eps;
            }
            (cfg, common.out)
        }
        SimulateParticles {
            common,
            model,
            eps,
            n,
        } => {
            let mut cfg = base_config(ExperimentKind::SimulateParticles, &common)?;
            apply_model(&mut cfg, &model);
            if !eps.is_empty() {
                cfg.eps_values = eps;
            }
            if let Some(n) = n {
                cfg.n_values = vec![n];
            }
            (cfg, common.out)
        }
        SimulateRidk {
            common,
            model,
            eps,
            n,
        } => {
            let mut cfg = base_config(ExperimentKind::SimulateRidk, &common)?;
            apply_model(&mut cfg, &model);
            if !eps.is_empty() {
                cfg.eps_values = eps;
            }
            if let Some(n) = n {
                cfg.n_values = vec![n];
            }
            (cfg, common.out)
        }
        Compare {
            common,
            model,
            eps,
            n,
        } => {
            let mut cfg = base_config(ExperimentKind::Compare, &common)?;
            apply_model(&mut cfg, &model);
            if !eps.is_empty() {
                cfg.eps_values = eps;
            }
            if let Some(n) = n {
                cfg.n_values = vec![n];
            }
            (cfg, common.out)
        }
        Convergence {
            common,
            model,
            theta,
            n,
        } => {
            let mut cfg = base_config(ExperimentKind::Convergence, &common)?;
            apply_model(&mut cfg, &model);
            if theta.is_some() {
                cfg.theta = theta;
            }
            if !n.is_empty() {
                cfg.n_values = n;
            }
            (cfg, common.out)
        }
        MicroScaling {
            common,
            model,
            n,
            eps,
        } => {
            let mut cfg = base_config(ExperimentKind::MicroScaling, &common)?;
            apply_model(&mut cfg, &model);
            if !n.is_empty() {
                cfg.n_values = n;
            }
            if !eps.is_empty() {
                cfg.eps_values = eps;
            }
            (cfg, common.out)
        }
        VerifyAppendix { common } => {
            let cfg = base_config(ExperimentKind::VerifyAppendix, &common)?;
            (cfg, common.out)
        }
    })
}
