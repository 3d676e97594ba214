//! The experiment recipes behind the command-line subcommands.
//!
//! Every recipe has the same shape: consume config keys, reject leftovers,
//! run the numerics, then write `resolved.cfg`, `summary.json`, and one or
//! more CSV tables into the output directory. Recipes return their summary
//! as a typed report so tests can assert on numbers without re-parsing
//! artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::field::{DistributionField, LpOrder};
use crate::model::{c_of_mu, envelope_rate, flux_j, total_flux, Equilibrium, KernelSpec};
use crate::particles::{gaussian_smooth, ParticleEnsemble, SimParams, TiePolicy, Torus};
use crate::solver::{SolverContext, StepReport};
use crate::sphere::{Dim, Direction};

use super::config::RawConfig;
use super::io::{
    read_json, write_csv, write_ensemble_snapshot, write_field_snapshot, write_json,
};
use super::{
    fit_slope, frequency_from, grids_from, initial_condition_from, solver_config_from,
    ExperimentError, RunIo,
};

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

/// Identity block embedded in every summary: which recipe ran, from which
/// config (by name and content hash), with which seed, and the full resolved
/// key set including defaults.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub experiment: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub resolved: BTreeMap<String, String>,
}

fn provenance(cfg: &RawConfig, experiment: &str, seed: u64) -> Provenance {
    Provenance {
        experiment: experiment.to_string(),
        config: cfg.name().to_string(),
        config_sha256: cfg.sha256().to_string(),
        seed,
        resolved: cfg.resolved().clone(),
    }
}

/// An optional `experiment` key must match the recipe being run; this
/// catches configs handed to the wrong subcommand.
fn check_experiment(cfg: &mut RawConfig, expected: &str) -> Result<(), ExperimentError> {
    if cfg.has("experiment") {
        let got = cfg.take_str("experiment")?;
        if got != expected {
            return Err(ExperimentError::BadValue {
                key: "experiment".into(),
                msg: format!("config declares `{got}` but the `{expected}` recipe was invoked"),
            });
        }
    }
    Ok(())
}

fn take_seed(cfg: &mut RawConfig) -> Result<u64, ExperimentError> {
    cfg.take_u64_or("seed", 0)
}

fn take_baseline_name(cfg: &mut RawConfig) -> Result<Option<String>, ExperimentError> {
    if cfg.has("baseline") {
        Ok(Some(cfg.take_str("baseline")?))
    } else {
        Ok(None)
    }
}

fn bad(key: &str, msg: impl Into<String>) -> ExperimentError {
    ExperimentError::BadValue { key: key.into(), msg: msg.into() }
}

/// Writes the provenance artifacts every recipe emits.
fn write_common<T: Serialize>(
    run: &RunIo,
    cfg: &RawConfig,
    report: &T,
) -> Result<(), ExperimentError> {
    std::fs::write(run.artifact("resolved.cfg"), cfg.resolved_text())?;
    write_json(&run.artifact("summary.json"), report)?;
    Ok(())
}

fn baseline_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.json"))
}

/// Records `payload` under the configured baseline name when the run was
/// started with `--record-baseline`; otherwise just echoes the name.
fn maybe_record_baseline<T: Serialize>(
    run: &RunIo,
    name: Option<&str>,
    payload: &T,
) -> Result<Option<String>, ExperimentError> {
    match (name, run.record_baseline()) {
        (Some(name), true) => {
            std::fs::create_dir_all(run.baselines_dir())?;
            write_json(&baseline_path(run.baselines_dir(), name), payload)?;
            Ok(Some(name.to_string()))
        }
        (Some(name), false) => Ok(Some(name.to_string())),
        (None, true) => Err(bad(
            "baseline",
            "recording was requested but the config names no baseline",
        )),
        (None, false) => Ok(None),
    }
}

/// Loads a recorded baseline by name from a baseline store.
pub fn load_baseline<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, ExperimentError> {
    let path = baseline_path(dir, name);
    if !path.exists() {
        return Err(ExperimentError::MissingBaseline(name.to_string()));
    }
    read_json(&path)
}

/// Number of steps in a horizon, which must be a positive integer multiple
/// of the step size (to relative precision 1e-9).
fn steps_for(t_end: f64, dt: f64, key: &str) -> Result<usize, ExperimentError> {
    let raw = t_end / dt;
    let steps = raw.round();
    if !(steps >= 1.0 && (raw - steps).abs() <= 1e-9 * raw.max(1.0)) {
        return Err(bad(key, format!("{t_end} is not a positive multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

fn report_row(r: &StepReport) -> Vec<f64> {
    vec![
        r.time,
        r.mass,
        r.l1,
        r.l2,
        r.linf,
        r.angular_energy_p2,
        r.min_abs_j,
        r.picard_iters as f64,
        r.picard_residual,
    ]
}

// ---------------------------------------------------------------------------
// run_pde
// ---------------------------------------------------------------------------

/// Summary of a [`run_pde`] trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct PdeReport {
    pub provenance: Provenance,
    pub steps: usize,
    pub final_time: f64,
    pub mass_initial: f64,
    /// Largest relative mass deviation over the reported rows.
    pub mass_drift_rel: f64,
    /// Worst min f/‖f‖∞ seen at any step (0 for a nonnegative trajectory).
    pub min_density_ratio: f64,
    /// Smallest min_x |J| over the run, against the α threshold.
    pub min_abs_j_run: f64,
    pub final_l2: f64,
    pub final_linf: f64,
    /// |∫∫ ω f dx dω| / mass of the final state.
    pub final_order_parameter: f64,
    /// Largest fixed-point iteration count over the reported rows.
    pub max_picard_iters: usize,
    /// Whether the first step's residuals decrease strictly.
    pub picard_monotone: bool,
    /// Full residual history of the first time step.
    pub first_step_residuals: Vec<f64>,
    pub baseline: Option<String>,
}

/// Regression payload recorded by [`run_pde`]: the fixed-point contraction
/// fingerprint of the first step plus the worst iteration count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PicardBaseline {
    pub first_step_residuals: Vec<f64>,
    pub max_picard_iters: usize,
}

/// Evolves the kinetic equation and writes `trace.csv` (the per-step
/// diagnostic series), `final.field`, and numbered `state_*.field`
/// snapshots when `snapshot_every > 0`.
///
/// Keys: the grid and solver keys ([`grids_from`], [`solver_config_from`]),
/// the initial-condition keys ([`initial_condition_from`]), `seed`
/// (recorded; the solver itself is deterministic), and optional `baseline`.
pub fn run_pde(cfg: &mut RawConfig, run: &RunIo) -> Result<PdeReport, ExperimentError> {
    check_experiment(cfg, "run_pde")?;
    let seed = take_seed(cfg)?;
    let (sgrid, agrid) = grids_from(cfg)?;
    let sc = solver_config_from(cfg)?;
    let f0 = initial_condition_from(cfg, &sc.nu, sc.mu, sgrid, agrid.clone())?;
    let baseline_name = take_baseline_name(cfg)?;
    cfg.finish()?;

    let steps = steps_for(sc.t_end, sc.dt, "t_end")?;
    let mut ctx = SolverContext::new(sc, sgrid, agrid)?;

    // The first step is solved twice: once to capture its full residual
    // history (evolve keeps only the final residual per row), then again
    // inside the trajectory. The duplication is exact; the solver is
    // deterministic.
    let (_, first) = ctx.picard_solve(&f0)?;
    let out = ctx.evolve(&f0)?;

    let max_picard_iters =
        out.reports.iter().map(|r| r.picard_iters).max().unwrap_or(0);
    let picard_monotone = first.residuals.windows(2).all(|w| w[1] < w[0]);
    let j_total = total_flux(&out.final_field);
    let mass = out.final_field.mass();

    run.ensure_out_dir()?;
    write_csv(
        &run.artifact("trace.csv"),
        &StepReport::COLUMNS,
        out.reports.iter().map(report_row),
    )?;
    write_field_snapshot(&run.artifact("final.field"), &out.final_field)?;
    for (k, snap) in out.snapshots.iter().enumerate() {
        write_field_snapshot(&run.artifact(&format!("state_{:04}.field", k + 1)), snap)?;
    }

    let payload = PicardBaseline {
        first_step_residuals: first.residuals.clone(),
        max_picard_iters,
    };
    let baseline = maybe_record_baseline(run, baseline_name.as_deref(), &payload)?;

    let report = PdeReport {
        provenance: provenance(cfg, "run_pde", seed),
        steps,
        final_time: out.final_field.time(),
        mass_initial: f0.mass(),
        mass_drift_rel: out.mass_drift_rel,
        min_density_ratio: out.min_density_ratio,
        min_abs_j_run: out.min_abs_j_run,
        final_l2: out.final_field.lp_norm(LpOrder::Finite(2.0))?,
        final_linf: out.final_field.lp_norm(LpOrder::Infinity)?,
        final_order_parameter: j_total.norm() / mass,
        max_picard_iters,
        picard_monotone,
        first_step_residuals: first.residuals,
        baseline,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// run_particles
// ---------------------------------------------------------------------------

/// Summary of a [`run_particles`] trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct ParticlesReport {
    pub provenance: Provenance,
    pub n_particles: usize,
    pub steps: usize,
    pub final_time: f64,
    /// |Σ ω_i|/N at the final time.
    pub final_order_parameter: f64,
    /// Mean |J̄_i| over particles at the final time.
    pub final_mean_abs_flux: f64,
    pub final_min_abs_flux: f64,
    /// Largest ||ω_i| − 1| at the final time.
    pub max_unit_norm_error: f64,
}

fn parse_tie(s: &str) -> Result<TiePolicy, ExperimentError> {
    match s {
        "keep_direction" => Ok(TiePolicy::KeepDirection),
        "random_direction" => Ok(TiePolicy::RandomDirection),
        other => Err(bad(
            "tie_policy",
            format!("unknown policy `{other}` (keep_direction | random_direction)"),
        )),
    }
}

fn torus_from(cfg: &mut RawConfig) -> Result<Torus, ExperimentError> {
    let dims = cfg.take_usize_or("dim_x", 1)?;
    let lx = cfg.take_f64_or("length_x", 1.0)?;
    match dims {
        1 => Ok(Torus::line(lx)?),
        2 => Ok(Torus::plane(lx, cfg.take_f64_or("length_y", lx)?)?),
        other => Err(bad("dim_x", format!("spatial dimension must be 1 or 2, got {other}"))),
    }
}

/// Runs the stochastic particle system and writes `trace.csv`
/// (`time, order_parameter, mean_abs_J, min_abs_J`) plus `final.ensemble`.
///
/// Keys: `seed`, `n_particles`, `sphere_dim` (2 | 3), `dim_x`, `length_x`
/// (`length_y`), `radius`, `mu`, `dt`, `t_end`, `report_every`,
/// `tie_policy`, `particle_ic` (`uniform` | `aligned` + `ic_director_angle`),
/// and the frequency keys.
pub fn run_particles(
    cfg: &mut RawConfig,
    run: &RunIo,
) -> Result<ParticlesReport, ExperimentError> {
    check_experiment(cfg, "run_particles")?;
    let seed = take_seed(cfg)?;
    let n = cfg.take_usize_or("n_particles", 1000)?;
    let sphere_dim = match cfg.take_usize_or("sphere_dim", 2)? {
        2 => Dim::Two,
        3 => Dim::Three,
        other => return Err(bad("sphere_dim", format!("must be 2 or 3, got {other}"))),
    };
    let torus = torus_from(cfg)?;
    let nu = frequency_from(cfg)?;
    let mu = cfg.take_f64("mu")?;
    let dt = cfg.take_f64_or("dt", 1e-3)?;
    let t_end = cfg.take_f64_or("t_end", 1.0)?;
    let radius = cfg.take_f64("radius")?;
    let report_every = cfg.take_usize_or("report_every", 10)?;
    if report_every == 0 {
        return Err(bad("report_every", "must be >= 1"));
    }
    let tie = parse_tie(&cfg.take_str_or("tie_policy", "keep_direction")?)?;
    let ic = cfg.take_str_or("particle_ic", "uniform")?;
    let mut ens = match ic.as_str() {
        "uniform" => ParticleEnsemble::sample_uniform(n, torus, sphere_dim, seed)?,
        "aligned" => {
            if sphere_dim != Dim::Two {
                return Err(bad("particle_ic", "aligned start requires sphere_dim = 2"));
            }
            let angle = cfg.take_f64_or("ic_director_angle", 0.0)?;
            ParticleEnsemble::sample_aligned(n, torus, &Direction::from_angle(angle), seed)?
        }
        other => {
            return Err(bad("particle_ic", format!("unknown start `{other}` (uniform | aligned)")))
        }
    };
    cfg.finish()?;

    let params = SimParams::new(nu, mu, dt, radius)?.with_tie_policy(tie);
    let steps = steps_for(t_end, dt, "t_end")?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let flux_stats = |ens: &ParticleEnsemble, step: usize, rows: &mut Vec<Vec<f64>>| {
        let fluxes = ens.neighbor_fluxes(radius);
        let mut min = f64::INFINITY;
        let mut sum = 0.0;
        for j in &fluxes {
            let norm = j.norm();
            min = min.min(norm);
            sum += norm;
        }
        rows.push(vec![
            step as f64 * dt,
            ens.order_parameter(),
            sum / fluxes.len() as f64,
            min,
        ]);
    };

    flux_stats(&ens, 0, &mut rows);
    for step in 1..=steps {
        ens.sde_step(&params)?;
        if step % report_every == 0 || step == steps {
            flux_stats(&ens, step, &mut rows);
        }
    }

    let last = rows.last().expect("at least the initial row");
    let (final_order, final_mean, final_min) = (last[1], last[2], last[3]);
    let max_unit_norm_error = ens
        .directions()
        .iter()
        .fold(0.0f64, |m, w| m.max((w.norm() - 1.0).abs()));

    run.ensure_out_dir()?;
    write_csv(
        &run.artifact("trace.csv"),
        &["time", "order_parameter", "mean_abs_J", "min_abs_J"],
        rows,
    )?;
    write_ensemble_snapshot(&run.artifact("final.ensemble"), &ens)?;

    let report = ParticlesReport {
        provenance: provenance(cfg, "run_particles", seed),
        n_particles: n,
        steps,
        final_time: steps as f64 * dt,
        final_order_parameter: final_order,
        final_mean_abs_flux: final_mean,
        final_min_abs_flux: final_min,
        max_unit_norm_error,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// run_equilibria
// ---------------------------------------------------------------------------

/// Summary of [`run_equilibria`]: the order-parameter table and the
/// relaxation of a perturbed aligned state back to the equilibrium manifold.
#[derive(Clone, Debug, Serialize)]
pub struct EquilibriaReport {
    pub provenance: Provenance,
    pub mu_grid: Vec<f64>,
    /// c(μ) on the sphere (d = 3).
    pub c_values_d3: Vec<f64>,
    /// c(μ) on the circle (d = 2).
    pub c_values_d2: Vec<f64>,
    /// Relaxation-run order parameter c(μ) on the circle.
    pub relax_c: f64,
    /// Final ‖f − ρ̂ M_{Ω*}‖₂ with Ω* read off the evolved flux.
    pub relax_final_l2: f64,
    /// Final | |J|/V − ρ̂ c(μ) |.
    pub relax_final_j_err: f64,
    /// Director angle of the evolved state.
    pub relax_director_angle: f64,
    pub baseline: Option<String>,
}

/// Baseline payload recorded by [`run_equilibria`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxationBaseline {
    pub final_l2: f64,
    pub final_j_err: f64,
}

/// Tabulates the equilibrium order parameter c(μ) in d = 2 and d = 3
/// (`c_table.csv`) and evolves an angularly perturbed aligned state on a
/// spatially homogeneous grid, tracking the L² distance to the manifold
/// (`relaxation.csv`: `time, l2_to_equilibrium, abs_j_error`).
///
/// Keys: `mu_grid`, `relax_amplitude`, `relax_mode`, `rho0`,
/// `ic_director_angle`, the grid and solver keys (with `mu` the relaxation
/// diffusion), and optional `baseline`.
pub fn run_equilibria(
    cfg: &mut RawConfig,
    run: &RunIo,
) -> Result<EquilibriaReport, ExperimentError> {
    check_experiment(cfg, "run_equilibria")?;
    let seed = take_seed(cfg)?;
    let mu_grid =
        cfg.take_f64_list_or("mu_grid", &[0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0])?;
    let (sgrid, agrid) = grids_from(cfg)?;
    let mut sc = solver_config_from(cfg)?;
    if sc.snapshot_every == 0 {
        sc.snapshot_every = sc.report_every;
    }
    let amp = cfg.take_f64_or("relax_amplitude", 0.1)?;
    let mode = cfg.take_usize_or("relax_mode", 2)? as f64;
    let angle0 = cfg.take_f64_or("ic_director_angle", 0.0)?;
    let rho0 = cfg.take_f64_or("rho0", 1.0)?;
    let baseline_name = take_baseline_name(cfg)?;
    cfg.finish()?;
    if !(amp.is_finite() && amp.abs() < 1.0) {
        return Err(bad("relax_amplitude", "must satisfy |a| < 1 to keep f₀ positive"));
    }

    // ----- order-parameter table -----
    let mut c3 = Vec::with_capacity(mu_grid.len());
    let mut c2 = Vec::with_capacity(mu_grid.len());
    for &mu in &mu_grid {
        c3.push(c_of_mu(&sc.nu, mu, Dim::Three)?);
        c2.push(c_of_mu(&sc.nu, mu, Dim::Two)?);
    }

    // ----- relaxation of a perturbed aligned state -----
    let eq = Equilibrium::new(&sc.nu, sc.mu, Dim::Two)?;
    let dir0 = Direction::from_angle(angle0);
    let axis0 = dir0.vector();
    let f0 = DistributionField::from_fn(sgrid, agrid.clone(), 0.0, |_, omega| {
        let gap = omega.angle() - angle0;
        rho0 * eq.density(omega.dot(&axis0)) * (1.0 + amp * (mode * gap).cos())
    })?;

    let volume = sgrid.cell_volume() * sgrid.n_cells() as f64;
    let relax_row = |field: &DistributionField| -> Result<(Vec<f64>, f64, f64, f64), ExperimentError> {
        let j = total_flux(field);
        let jn = j.norm();
        let rho_hat = field.mass() / volume;
        let angle = j.y.atan2(j.x);
        let target = eq.field(
            sgrid,
            agrid.clone(),
            &Direction::from_angle(angle),
            |_| rho_hat,
            field.time(),
        )?;
        let dist = field.lp_distance(&target, LpOrder::Finite(2.0))?;
        let j_err = (jn / volume - rho_hat * eq.order_parameter()).abs();
        Ok((vec![field.time(), dist, j_err], dist, j_err, angle))
    };

    let mut ctx = SolverContext::new(sc, sgrid, agrid.clone())?;
    let out = ctx.evolve(&f0)?;

    let mut rows = Vec::new();
    rows.push(relax_row(&f0)?.0);
    for snap in &out.snapshots {
        rows.push(relax_row(snap)?.0);
    }
    let (row, final_l2, final_j_err, final_angle) = relax_row(&out.final_field)?;
    let at_final = out.snapshots.last().map(|s| s.time()) == Some(out.final_field.time());
    if !at_final {
        rows.push(row);
    }

    run.ensure_out_dir()?;
    write_csv(
        &run.artifact("c_table.csv"),
        &["mu", "c_d3", "c_d2"],
        mu_grid.iter().zip(c3.iter().zip(&c2)).map(|(&mu, (&a, &b))| vec![mu, a, b]),
    )?;
    write_csv(
        &run.artifact("relaxation.csv"),
        &["time", "l2_to_equilibrium", "abs_j_error"],
        rows,
    )?;

    let payload = RelaxationBaseline { final_l2, final_j_err };
    let baseline = maybe_record_baseline(run, baseline_name.as_deref(), &payload)?;

    let report = EquilibriaReport {
        provenance: provenance(cfg, "run_equilibria", seed),
        mu_grid,
        c_values_d3: c3,
        c_values_d2: c2,
        relax_c: eq.order_parameter(),
        relax_final_l2: final_l2,
        relax_final_j_err: final_j_err,
        relax_director_angle: final_angle,
        baseline,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// run_bounds
// ---------------------------------------------------------------------------

/// Per-order outcome of the envelope check in [`run_bounds`].
#[derive(Clone, Debug, Serialize)]
pub struct OrderBound {
    pub order: String,
    /// Envelope exponent: C·p/(p−1) for finite p > 1, C for ∞, 0 for p = 1.
    pub rate: f64,
    /// Report rows with ‖f‖_p > (1 + 1e−9)·envelope.
    pub violations: usize,
    /// max_t ‖f(t)‖_p / envelope(t) (≤ 1 when the bound holds).
    pub max_ratio: f64,
}

/// Summary of [`run_bounds`].
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub provenance: Provenance,
    /// C = ‖ν′‖∞ + d‖ν‖∞.
    pub growth_constant: f64,
    pub orders: Vec<OrderBound>,
    pub mass_drift_rel: f64,
}

/// Evolves the kinetic equation and checks the a-priori norm envelopes
/// ‖f(t)‖_p ≤ e^{rate·t}‖f₀‖_p at every report row, writing `bounds.csv`
/// (`time, l1, env_l1, l2, env_l2, linf, env_linf`).
///
/// Keys: the grid/solver/IC keys plus `p_list` ⊂ {1, 2, inf} (which orders
/// are checked; all three envelope columns are always written).
pub fn run_bounds(cfg: &mut RawConfig, run: &RunIo) -> Result<BoundsReport, ExperimentError> {
    check_experiment(cfg, "run_bounds")?;
    let seed = take_seed(cfg)?;
    let (sgrid, agrid) = grids_from(cfg)?;
    let sc = solver_config_from(cfg)?;
    let f0 = initial_condition_from(cfg, &sc.nu, sc.mu, sgrid, agrid.clone())?;
    let p_list = cfg.take_str_list_or("p_list", "1, 2, inf")?;
    cfg.finish()?;

    let mut orders = Vec::with_capacity(p_list.len());
    for name in &p_list {
        let p = LpOrder::parse(name)
            .ok_or_else(|| bad("p_list", format!("unparsable order `{name}`")))?;
        if !matches!(p, LpOrder::Infinity | LpOrder::Finite(1.0) | LpOrder::Finite(2.0)) {
            return Err(bad(
                "p_list",
                "only the reported norms 1, 2, inf can be checked against envelopes",
            ));
        }
        orders.push((name.clone(), p));
    }

    let growth = sc.nu.growth_constant(agrid.dim());
    let norms0 = [
        f0.lp_norm(LpOrder::Finite(1.0))?,
        f0.lp_norm(LpOrder::Finite(2.0))?,
        f0.lp_norm(LpOrder::Infinity)?,
    ];
    let rates = [
        envelope_rate(growth, LpOrder::Finite(1.0)),
        envelope_rate(growth, LpOrder::Finite(2.0)),
        envelope_rate(growth, LpOrder::Infinity),
    ];

    let mut ctx = SolverContext::new(sc, sgrid, agrid)?;
    let out = ctx.evolve(&f0)?;

    let env = |slot: usize, t: f64| norms0[slot] * (rates[slot] * t).exp();
    let slot_of = |p: LpOrder| match p {
        LpOrder::Finite(q) if q == 1.0 => 0,
        LpOrder::Finite(_) => 1,
        LpOrder::Infinity => 2,
    };
    let norm_of = |r: &StepReport, slot: usize| [r.l1, r.l2, r.linf][slot];

    let rows: Vec<Vec<f64>> = out
        .reports
        .iter()
        .map(|r| {
            vec![
                r.time,
                r.l1,
                env(0, r.time),
                r.l2,
                env(1, r.time),
                r.linf,
                env(2, r.time),
            ]
        })
        .collect();

    let order_bounds: Vec<OrderBound> = orders
        .into_iter()
        .map(|(name, p)| {
            let slot = slot_of(p);
            let mut violations = 0;
            let mut max_ratio = 0.0f64;
            for r in &out.reports {
                let bound = env(slot, r.time);
                let ratio = norm_of(r, slot) / bound;
                max_ratio = max_ratio.max(ratio);
                if ratio > 1.0 + 1e-9 {
                    violations += 1;
                }
            }
            OrderBound { order: name, rate: rates[slot], violations, max_ratio }
        })
        .collect();

    run.ensure_out_dir()?;
    write_csv(
        &run.artifact("bounds.csv"),
        &["time", "l1", "env_l1", "l2", "env_l2", "linf", "env_linf"],
        rows,
    )?;

    let report = BoundsReport {
        provenance: provenance(cfg, "run_bounds", seed),
        growth_constant: growth,
        orders: order_bounds,
        mass_drift_rel: out.mass_drift_rel,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// run_eps_study
// ---------------------------------------------------------------------------

/// Summary of [`run_eps_study`].
#[derive(Clone, Debug, Serialize)]
pub struct EpsStudyReport {
    pub provenance: Provenance,
    /// The ladder, sorted strictly decreasing.
    pub eps_ladder: Vec<f64>,
    /// min over the run of min_x |J| per rung.
    pub min_abs_flux: Vec<f64>,
    pub mass_drift_rel: Vec<f64>,
    /// Non-degeneracy threshold the rungs are compared against.
    pub alpha: f64,
    /// Whether every rung kept min |J| ≥ α.
    pub admissible: bool,
    /// ‖J_{ε_k} − J_{ε_{k+1}}‖₂ at the final time, per consecutive pair.
    pub pair_flux_dist_l2: Vec<f64>,
    /// ‖f_{ε_k} − f_{ε_{k+1}}‖₁ at the final time, per consecutive pair.
    pub pair_field_dist_l1: Vec<f64>,
    /// Whether the field differences decrease along the ladder.
    pub differences_monotone: bool,
}

/// Runs the solver once per regularization rung from the same initial state
/// and compares consecutive final states, writing `eps_runs.csv`
/// (`eps, min_abs_J, mass_drift_rel`) and `eps_pairs.csv`
/// (`eps_hi, eps_lo, j_dist_l2, f_dist_l1`).
///
/// Keys: the grid/solver/IC keys with `eps_ladder` instead of `eps`
/// (setting `eps` is rejected).
pub fn run_eps_study(
    cfg: &mut RawConfig,
    run: &RunIo,
) -> Result<EpsStudyReport, ExperimentError> {
    check_experiment(cfg, "run_eps_study")?;
    let seed = take_seed(cfg)?;
    if cfg.has("eps") {
        return Err(bad("eps", "the ladder recipe takes `eps_ladder`, not a single `eps`"));
    }
    let mut ladder = cfg.take_f64_list("eps_ladder")?;
    let (sgrid, agrid) = grids_from(cfg)?;
    let sc = solver_config_from(cfg)?;
    let f0 = initial_condition_from(cfg, &sc.nu, sc.mu, sgrid, agrid.clone())?;
    cfg.finish()?;

    if ladder.len() < 2 {
        return Err(bad("eps_ladder", "need at least two rungs"));
    }
    for &e in &ladder {
        if !(e.is_finite() && e > 0.0) {
            return Err(bad("eps_ladder", format!("rungs must be > 0, got {e}")));
        }
    }
    ladder.sort_by(|a, b| b.partial_cmp(a).expect("finite rungs"));
    if ladder.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad("eps_ladder", "rungs must be distinct"));
    }

    let kernel = sc.kernel.on_grid(&sgrid)?;
    let mut finals: Vec<DistributionField> = Vec::with_capacity(ladder.len());
    let mut min_flux = Vec::with_capacity(ladder.len());
    let mut drifts = Vec::with_capacity(ladder.len());
    for &eps in &ladder {
        let mut sc_rung = sc.clone();
        sc_rung.eps = eps;
        let mut ctx = SolverContext::new(sc_rung, sgrid, agrid.clone())?;
        let out = ctx.evolve(&f0)?;
        min_flux.push(out.min_abs_j_run);
        drifts.push(out.mass_drift_rel);
        finals.push(out.final_field);
    }

    let dv = sgrid.cell_volume();
    let mut pair_j = Vec::with_capacity(ladder.len() - 1);
    let mut pair_f = Vec::with_capacity(ladder.len() - 1);
    for pair in finals.windows(2) {
        let (hi, lo) = (&pair[0], &pair[1]);
        let jh = flux_j(hi, &kernel)?;
        let jl = flux_j(lo, &kernel)?;
        let mut sq = 0.0;
        for (a, b) in jh.fluxes().iter().zip(jl.fluxes()) {
            sq += (a - b).norm_squared() * dv;
        }
        pair_j.push(sq.sqrt());
        pair_f.push(hi.lp_distance(lo, LpOrder::Finite(1.0))?);
    }
    let admissible = min_flux.iter().all(|&m| m >= sc.alpha);
    let differences_monotone =
        pair_f.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + f64::MIN_POSITIVE);

    run.ensure_out_dir()?;
    write_csv(
        &run.artifact("eps_runs.csv"),
        &["eps", "min_abs_J", "mass_drift_rel"],
        ladder
            .iter()
            .zip(min_flux.iter().zip(&drifts))
            .map(|(&e, (&m, &d))| vec![e, m, d]),
    )?;
    write_csv(
        &run.artifact("eps_pairs.csv"),
        &["eps_hi", "eps_lo", "j_dist_l2", "f_dist_l1"],
        ladder
            .windows(2)
            .zip(pair_j.iter().zip(&pair_f))
            .map(|(w, (&j, &f))| vec![w[0], w[1], j, f]),
    )?;

    let report = EpsStudyReport {
        provenance: provenance(cfg, "run_eps_study", seed),
        eps_ladder: ladder,
        min_abs_flux: min_flux,
        mass_drift_rel: drifts,
        alpha: sc.alpha,
        admissible,
        pair_flux_dist_l2: pair_j,
        pair_field_dist_l1: pair_f,
        differences_monotone,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// run_stability
// ---------------------------------------------------------------------------

/// Summary of [`run_stability`].
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub provenance: Provenance,
    pub delta: f64,
    pub delta_mode: usize,
    /// ‖f₀ − g₀‖₂.
    pub delta0_l2: f64,
    /// Tightest envelope exponent on the main run:
    /// max over report times t > 0 of ln(d(t)/d(0))/t.
    pub c_hat: f64,
    /// Same fit on a pre-run with `pre_dt_factor`× the step size.
    pub c_hat_pre: f64,
    /// Rows violating d(t) ≤ d(0)·e^{Ĉt} (zero by construction of Ĉ).
    pub envelope_violations: usize,
    /// Rows violating the pre-run envelope (informational).
    pub pre_envelope_violations: usize,
    /// True when δ = 0: the trajectories coincide bitwise.
    pub identical: bool,
    pub baseline: Option<String>,
}

/// Baseline payload recorded by [`run_stability`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityBaseline {
    pub c_hat: f64,
}

/// Tightest single-exponential envelope through d(0): the largest
/// ln(d(t)/d(0))/t over the reported times.
fn envelope_fit(times: &[f64], dists: &[f64]) -> f64 {
    let d0 = dists[0];
    let fit = times
        .iter()
        .zip(dists)
        .skip(1)
        .filter(|&(_, &d)| d > 0.0 && d0 > 0.0)
        .map(|(&t, &d)| (d / d0).ln() / t)
        .fold(f64::NEG_INFINITY, f64::max);
    if fit.is_finite() {
        fit
    } else {
        0.0
    }
}

/// Evolves a base trajectory and a δ-perturbed sibling with identical
/// numerics, tracking their L² separation, and fits the envelope exponent
/// Ĉ; writes `stability.csv` (`time, distance_l2, envelope`).
///
/// The perturbation is a relative ripple on the initial state, either
/// spatial (`delta_axis = space`, g₀ = f₀·(1 + δ cos(2π m x/L))) or
/// angular (`delta_axis = angle`, g₀ = f₀·(1 + δ cos(m θ)) — this one
/// feeds the first angular harmonic, the unstable direction of a weakly
/// aligned state, so the separation grows at the instability rate).
///
/// Keys: the grid/solver/IC keys plus `delta`, `delta_mode`, `delta_axis`,
/// `pre_dt_factor` (coarse pre-run multiplier), optional `baseline`.
/// The snapshot cadence is tied to `report_every` (setting `snapshot_every`
/// is rejected).
pub fn run_stability(
    cfg: &mut RawConfig,
    run: &RunIo,
) -> Result<StabilityReport, ExperimentError> {
    check_experiment(cfg, "run_stability")?;
    let seed = take_seed(cfg)?;
    if cfg.has("snapshot_every") {
        return Err(bad(
            "snapshot_every",
            "the separation is sampled at every report row; set report_every instead",
        ));
    }
    let (sgrid, agrid) = grids_from(cfg)?;
    let mut sc = solver_config_from(cfg)?;
    sc.snapshot_every = sc.report_every;
    let delta = cfg.take_f64_or("delta", 1e-4)?;
    let mode = cfg.take_usize_or("delta_mode", 1)?;
    let delta_axis = cfg.take_str_or("delta_axis", "space")?;
    let pre_factor = cfg.take_usize_or("pre_dt_factor", 4)?;
    let f0 = initial_condition_from(cfg, &sc.nu, sc.mu, sgrid, agrid.clone())?;
    let baseline_name = take_baseline_name(cfg)?;
    cfg.finish()?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(bad("delta", format!("must be >= 0, got {delta}")));
    }
    if pre_factor == 0 {
        return Err(bad("pre_dt_factor", "must be >= 1"));
    }

    let lx = sgrid.length_axis(0);
    let factor: Box<dyn Fn(usize, usize) -> f64> = match delta_axis.as_str() {
        "space" => Box::new(|cell, _| {
            let x = sgrid.position(cell)[0];
            1.0 + delta * (2.0 * std::f64::consts::PI * mode as f64 * x / lx).cos()
        }),
        "angle" => {
            let thetas = agrid.thetas().to_vec();
            Box::new(move |_, j| 1.0 + delta * (mode as f64 * thetas[j]).cos())
        }
        other => return Err(bad("delta_axis", format!("unknown axis `{other}` (space | angle)"))),
    };
    let perturb = |field: &DistributionField| -> Result<DistributionField, ExperimentError> {
        let nt = field.n_theta();
        let mut values = Vec::with_capacity(field.values().len());
        for cell in 0..sgrid.n_cells() {
            for j in 0..nt {
                values.push(field.value(cell, j) * factor(cell, j));
            }
        }
        Ok(DistributionField::new(sgrid, agrid.clone(), values, field.time())?)
    };
    let g0 = perturb(&f0)?;
    let delta0 = f0.lp_distance(&g0, LpOrder::Finite(2.0))?;

    // Separation at every report time along the main run.
    let separations = |sc: &crate::solver::SolverConfig|
        -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
        let out_f = SolverContext::new(sc.clone(), sgrid, agrid.clone())?.evolve(&f0)?;
        let out_g = SolverContext::new(sc.clone(), sgrid, agrid.clone())?.evolve(&g0)?;
        let mut times = vec![0.0];
        let mut dists = vec![delta0];
        for (a, b) in out_f.snapshots.iter().zip(&out_g.snapshots) {
            times.push(a.time());
            dists.push(a.lp_distance(b, LpOrder::Finite(2.0))?);
        }
        if out_f.snapshots.last().map(|s| s.time()) != Some(out_f.final_field.time()) {
            times.push(out_f.final_field.time());
            dists.push(out_f.final_field.lp_distance(&out_g.final_field, LpOrder::Finite(2.0))?);
        }
        Ok((times, dists))
    };

    let (times, dists) = separations(&sc)?;
    let identical = dists.iter().all(|&d| d == 0.0);
    let c_hat = if identical { 0.0 } else { envelope_fit(&times, &dists) };

    let c_hat_pre = if identical || pre_factor == 1 {
        c_hat
    } else {
        let mut sc_pre = sc.clone();
        sc_pre.dt = sc.dt * pre_factor as f64;
        sc_pre.report_every = (sc.report_every / pre_factor).max(1);
        sc_pre.snapshot_every = sc_pre.report_every;
        steps_for(sc_pre.t_end, sc_pre.dt, "pre_dt_factor")?;
        let (tp, dp) = separations(&sc_pre)?;
        envelope_fit(&tp, &dp)
    };

    let envelope = |t: f64, rate: f64| delta0 * (rate * t).exp();
    let mut violations = 0;
    let mut violations_pre = 0;
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&dists)
        .map(|(&t, &d)| {
            let env = envelope(t, c_hat);
            if d > env * (1.0 + 1e-9) {
                violations += 1;
            }
            if d > envelope(t, c_hat_pre) * (1.0 + 1e-9) {
                violations_pre += 1;
            }
            vec![t, d, env]
        })
        .collect();

    run.ensure_out_dir()?;
    write_csv(&run.artifact("stability.csv"), &["time", "distance_l2", "envelope"], rows)?;

    let payload = StabilityBaseline { c_hat };
    let baseline = maybe_record_baseline(run, baseline_name.as_deref(), &payload)?;

    let report = StabilityReport {
        provenance: provenance(cfg, "run_stability", seed),
        delta,
        delta_mode: mode,
        delta0_l2: delta0,
        c_hat,
        c_hat_pre,
        envelope_violations: violations,
        pre_envelope_violations: violations_pre,
        identical,
        baseline,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// run_meanfield
// ---------------------------------------------------------------------------

/// Summary of [`run_meanfield`].
#[derive(Clone, Debug, Serialize)]
pub struct MeanfieldReport {
    pub provenance: Provenance,
    pub n_ladder: Vec<usize>,
    /// Relative smoothing bandwidth applied to both densities.
    pub bandwidth: f64,
    pub checkpoint_times: Vec<f64>,
    /// L¹ distance at the last checkpoint, per ensemble size.
    pub final_distances: Vec<f64>,
    /// Fitted slope of ln(distance) against ln(N) at the last checkpoint
    /// (Monte Carlo scaling predicts ≈ −1/2).
    pub slope: f64,
}

/// Compares stochastic ensembles sampled from the kinetic initial state
/// against the kinetic solution at checkpoint times, writing
/// `meanfield.csv` (`n, time, l1_distance`). Both the empirical and the
/// kinetic densities are smoothed with the same periodic Gaussian before
/// comparison, so the binning bias cancels and the Monte Carlo noise
/// remains.
///
/// Keys: the grid/solver/IC keys (kernel must be `top_hat`; its radius is
/// the particle interaction radius), `n_ladder`, `bandwidth`,
/// `t_checkpoints`, `tie_policy`, `seed` (rung i uses `seed + i`).
pub fn run_meanfield(
    cfg: &mut RawConfig,
    run: &RunIo,
) -> Result<MeanfieldReport, ExperimentError> {
    check_experiment(cfg, "run_meanfield")?;
    let seed = take_seed(cfg)?;
    if cfg.has("snapshot_every") {
        return Err(bad("snapshot_every", "snapshots are taken at the checkpoints"));
    }
    let (sgrid, agrid) = grids_from(cfg)?;
    let mut sc = solver_config_from(cfg)?;
    let f0 = initial_condition_from(cfg, &sc.nu, sc.mu, sgrid, agrid.clone())?;
    let n_ladder = cfg.take_usize_list_or("n_ladder", &[1000, 10000])?;
    let bandwidth = cfg.take_f64_or("bandwidth", 0.05)?;
    let checkpoints = cfg.take_f64_list_or("t_checkpoints", &[sc.t_end])?;
    let tie = parse_tie(&cfg.take_str_or("tie_policy", "keep_direction")?)?;
    cfg.finish()?;

    let radius = match sc.kernel {
        KernelSpec::TopHat { radius } => radius,
        _ => {
            return Err(bad(
                "kernel",
                "the particle comparison needs a top_hat kernel (finite interaction radius)",
            ))
        }
    };
    if n_ladder.is_empty() || n_ladder.iter().any(|&n| n == 0) {
        return Err(bad("n_ladder", "ensemble sizes must be positive"));
    }
    let mut ck_steps = Vec::with_capacity(checkpoints.len());
    for &t in &checkpoints {
        let s = steps_for(t, sc.dt, "t_checkpoints")?;
        if t > sc.t_end * (1.0 + 1e-9) {
            return Err(bad("t_checkpoints", format!("checkpoint {t} exceeds t_end {}", sc.t_end)));
        }
        ck_steps.push(s);
    }
    if ck_steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("t_checkpoints", "checkpoints must be strictly increasing"));
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let cadence = ck_steps.iter().copied().fold(0, gcd);
    sc.snapshot_every = cadence;

    // Kinetic side: one run, smoothed and mass-normalized at checkpoints.
    let mut ctx = SolverContext::new(sc.clone(), sgrid, agrid.clone())?;
    let out = ctx.evolve(&f0)?;
    let mass0 = f0.mass();
    let mut pde_smoothed = Vec::with_capacity(ck_steps.len());
    for &s in &ck_steps {
        let snap = &out.snapshots[s / cadence - 1];
        let smooth = gaussian_smooth(snap, bandwidth)?;
        let values: Vec<f64> = smooth.values().iter().map(|v| v / mass0).collect();
        pde_smoothed.push(DistributionField::new(sgrid, agrid.clone(), values, snap.time())?);
    }

    // Particle side: one ensemble per rung, compared at each checkpoint.
    let mut rows = Vec::new();
    let mut final_dists = Vec::with_capacity(n_ladder.len());
    for (i, &n) in n_ladder.iter().enumerate() {
        let params =
            SimParams::new(sc.nu.clone(), sc.mu, sc.dt, radius)?.with_tie_policy(tie);
        let mut ens = ParticleEnsemble::sample_from_field(&f0, n, seed.wrapping_add(i as u64))?;
        let mut step = 0;
        let mut last = f64::NAN;
        for (&ck, pde) in ck_steps.iter().zip(&pde_smoothed) {
            while step < ck {
                ens.sde_step(&params)?;
                step += 1;
            }
            let emp = ens.empirical_density(sgrid, agrid.clone(), bandwidth)?;
            last = emp.lp_distance(pde, LpOrder::Finite(1.0))?;
            rows.push(vec![n as f64, ck as f64 * sc.dt, last]);
        }
        final_dists.push(last);
    }

    let slope = if n_ladder.len() >= 2 {
        let xs: Vec<f64> = n_ladder.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = final_dists.iter().map(|&d| d.ln()).collect();
        fit_slope(&xs, &ys)
    } else {
        f64::NAN
    };

    run.ensure_out_dir()?;
    write_csv(&run.artifact("meanfield.csv"), &["n", "time", "l1_distance"], rows)?;

    let report = MeanfieldReport {
        provenance: provenance(cfg, "run_meanfield", seed),
        n_ladder,
        bandwidth,
        checkpoint_times: checkpoints,
        final_distances: final_dists,
        slope,
    };
    write_common(run, cfg, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_io(dir: &tempfile::TempDir) -> RunIo {
        RunIo::new(dir.path().join("out"), false)
            .with_baselines_dir(dir.path().join("baselines"))
    }

    fn tiny_pde_cfg(extra: &str) -> RawConfig {
        RawConfig::from_str(
            &format!(
                "experiment = run_pde\nnx = 16\nn_theta = 32\nmu = 0.3\ndt = 0.002\nt_end = 0.02\nalpha = 0.1\n{extra}"
            ),
            "tiny",
        )
        .expect("config parses")
    }

    #[test]
    fn pde_recipe_writes_the_advertised_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let io = run_io(&dir);
        let mut cfg = tiny_pde_cfg("report_every = 5\nsnapshot_every = 5\n");
        let report = run_pde(&mut cfg, &io).expect("recipe runs");

        assert_eq!(report.steps, 10);
        assert!(report.mass_drift_rel < 1e-12);
        assert!(report.picard_monotone);
        assert!(report.max_picard_iters <= 5);
        for name in ["trace.csv", "final.field", "state_0001.field", "state_0002.field",
                     "resolved.cfg", "summary.json"] {
            assert!(io.out_dir().join(name).exists(), "missing {name}");
        }
        let trace = std::fs::read_to_string(io.out_dir().join("trace.csv")).unwrap();
        let mut lines = trace.lines();
        assert_eq!(lines.next().unwrap(), StepReport::COLUMNS.join(","));
        // initial row + steps 5 and 10
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn pde_recipe_is_deterministic_per_artifact() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let (io_a, io_b) = (run_io(&dir_a), run_io(&dir_b));
        run_pde(&mut tiny_pde_cfg(""), &io_a).unwrap();
        run_pde(&mut tiny_pde_cfg(""), &io_b).unwrap();
        for name in ["trace.csv", "final.field", "summary.json", "resolved.cfg"] {
            let a = std::fs::read(io_a.out_dir().join(name)).unwrap();
            let b = std::fs::read(io_b.out_dir().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn unknown_keys_abort_before_any_compute() {
        let dir = tempfile::tempdir().unwrap();
        let io = run_io(&dir);
        let mut cfg = tiny_pde_cfg("typo_key = 1\n");
        match run_pde(&mut cfg, &io) {
            Err(ExperimentError::UnknownKeys(keys)) => {
                assert!(keys[0].contains("typo_key"));
            }
            other => panic!("expected UnknownKeys, got {other:?}"),
        }
        assert!(!io.out_dir().exists(), "no artifacts on rejected config");
    }

    #[test]
    fn experiment_name_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let io = run_io(&dir);
        let mut cfg = tiny_pde_cfg("");
        match run_bounds(&mut cfg, &io) {
            Err(ExperimentError::BadValue { key, .. }) => assert_eq!(key, "experiment"),
            other => panic!("expected BadValue, got {other:?}"),
        }
    }

    #[test]
    fn baseline_recording_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let io = RunIo::new(dir.path().join("out"), true)
            .with_baselines_dir(dir.path().join("baselines"));
        let mut cfg = tiny_pde_cfg("baseline = tiny_picard\n");
        let report = run_pde(&mut cfg, &io).expect("recipe runs");
        let stored: PicardBaseline =
            load_baseline(io.baselines_dir(), "tiny_picard").expect("baseline exists");
        assert_eq!(stored.first_step_residuals, report.first_step_residuals);
        assert_eq!(stored.max_picard_iters, report.max_picard_iters);
        assert!(matches!(
            load_baseline::<PicardBaseline>(io.baselines_dir(), "absent"),
            Err(ExperimentError::MissingBaseline(_))
        ));
    }

    #[test]
    fn stability_with_zero_delta_reports_identical_trajectories() {
        let dir = tempfile::tempdir().unwrap();
        let io = run_io(&dir);
        let mut cfg = RawConfig::from_str(
            "nx = 16\nn_theta = 32\nmu = 0.3\ndt = 0.002\nt_end = 0.02\ndelta = 0\n",
            "tiny-stability",
        )
        .unwrap();
        let report = run_stability(&mut cfg, &io).expect("recipe runs");
        assert!(report.identical);
        assert_eq!(report.c_hat, 0.0);
        assert_eq!(report.envelope_violations, 0);
        assert_eq!(report.delta0_l2, 0.0);
    }
}
