//! Thin command-line front end: parses arguments, loads the config file,
//! and dispatches to the experiment recipes in the library.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use vicsek_kinetics::experiments::{self as exp, RawConfig, RunIo};

#[derive(Parser)]
#[command(
    name = "vicsek-kinetics",
    version,
    about = "Kinetic alignment-model laboratory: mean-field solver, particle simulator, \
             and experiment recipes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the kinetic equation and record the diagnostic series
    RunPde(RunArgs),
    /// Simulate the interacting-particle system
    RunParticles(RunArgs),
    /// Tabulate the order parameter c(mu) and relax a perturbed aligned state
    Equilibria(RunArgs),
    /// Check the a-priori norm envelopes along a run
    Bounds(RunArgs),
    /// Compare solutions across the regularization ladder
    EpsStudy(RunArgs),
    /// Track the separation of two nearby solutions and fit its rate
    Stability(RunArgs),
    /// Compare particle ensembles against the kinetic solution
    MeanfieldCompare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: runs/<subcommand>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    /// Record derived reference values into the baseline store
    #[arg(long)]
    record_baseline: bool,
}

fn prepare(name: &str, args: &RunArgs) -> anyhow::Result<(RawConfig, RunIo, PathBuf)> {
    let mut cfg = RawConfig::from_path(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.override_key("seed", &seed.to_string());
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(name));
    let run = RunIo::new(&out, args.record_baseline);
    Ok((cfg, run, out))
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .init();
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::RunPde(args) => {
            let (mut cfg, run, out) = prepare("run-pde", args)?;
            let r = exp::run_pde(&mut cfg, &run)?;
            log::info!(
                "{} steps, mass drift {:.3e}, min|J| {:.3e}, max Picard iters {}",
                r.steps,
                r.mass_drift_rel,
                r.min_abs_j_run,
                r.max_picard_iters
            );
            out
        }
        Command::RunParticles(args) => {
            let (mut cfg, run, out) = prepare("run-particles", args)?;
            let r = exp::run_particles(&mut cfg, &run)?;
            log::info!(
                "{} particles, {} steps, final order parameter {:.4}",
                r.n_particles,
                r.steps,
                r.final_order_parameter
            );
            out
        }
        Command::Equilibria(args) => {
            let (mut cfg, run, out) = prepare("equilibria", args)?;
            let r = exp::run_equilibria(&mut cfg, &run)?;
            log::info!(
                "{} mu values; relaxation L2 {:.3e}, |J| error {:.3e}",
                r.mu_grid.len(),
                r.relax_final_l2,
                r.relax_final_j_err
            );
            out
        }
        Command::Bounds(args) => {
            let (mut cfg, run, out) = prepare("bounds", args)?;
            let r = exp::run_bounds(&mut cfg, &run)?;
            for o in &r.orders {
                log::info!(
                    "p = {}: rate {:.3}, {} violations, max ratio {:.6}",
                    o.order,
                    o.rate,
                    o.violations,
                    o.max_ratio
                );
            }
            out
        }
        Command::EpsStudy(args) => {
            let (mut cfg, run, out) = prepare("eps-study", args)?;
            let r = exp::run_eps_study(&mut cfg, &run)?;
            log::info!(
                "{} rungs, admissible: {}, differences monotone: {}",
                r.eps_ladder.len(),
                r.admissible,
                r.differences_monotone
            );
            out
        }
        Command::Stability(args) => {
            let (mut cfg, run, out) = prepare("stability", args)?;
            let r = exp::run_stability(&mut cfg, &run)?;
            log::info!(
                "delta {:.1e}, fitted rate {:.4} (pre-run {:.4}), violations {}",
                r.delta,
                r.c_hat,
                r.c_hat_pre,
                r.envelope_violations
            );
            out
        }
        Command::MeanfieldCompare(args) => {
            let (mut cfg, run, out) = prepare("meanfield-compare", args)?;
            let r = exp::run_meanfield(&mut cfg, &run)?;
            log::info!(
                "N ladder {:?}, slope {:.3}, final distances {:?}",
                r.n_ladder,
                r.slope,
                r.final_distances
            );
            out
        }
    };
    println!("wrote artifacts to {}", out.display());
    Ok(())
}
