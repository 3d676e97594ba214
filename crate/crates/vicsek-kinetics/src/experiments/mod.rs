//! Experiment recipes: reproducible runs bound to flat key = value
//! configuration files, each emitting CSV tables, a JSON summary, and the
//! fully-resolved configuration for provenance.
//!
//! Every recipe is a plain function taking a parsed [`RawConfig`] and a
//! [`RunIo`] destination, so the command-line binary stays a thin
//! dispatcher and tests can drive recipes directly:
//!
//! | recipe | claim exercised |
//! |---|---|
//! | [`run_pde`] | kinetic solver trajectory with conservation diagnostics |
//! | [`run_particles`] | stochastic ensemble trajectory |
//! | [`run_equilibria`] | order parameter table and relaxation to the equilibrium manifold |
//! | [`run_bounds`] | Grönwall envelopes on ‖f‖_p |
//! | [`run_eps_study`] | regularization ladder Ω_ε → Ω |
//! | [`run_stability`] | two-trajectory separation and fitted growth rate |
//! | [`run_meanfield`] | particle ensembles against the kinetic solution |
//!
//! Config keys shared by the PDE-driven recipes are documented on
//! [`solver_config_from`]; see each recipe for its own keys. Reruns with
//! the same config and seed are bit-identical in every CSV artifact.

pub mod config;
pub mod io;
mod recipes;

pub use config::RawConfig;
pub use recipes::{
    load_baseline, run_bounds, run_eps_study, run_equilibria, run_meanfield, run_particles,
    run_pde, run_stability, BoundsReport, EpsStudyReport, EquilibriaReport, MeanfieldReport,
    OrderBound, ParticlesReport, PdeReport, PicardBaseline, Provenance, RelaxationBaseline,
    StabilityBaseline, StabilityReport,
};

use crate::field::{DistributionField, FieldError, SpatialGrid};
use crate::model::{Equilibrium, FrequencySpec, KernelSpec, ModelError};
use crate::particles::ParticleError;
use crate::solver::{SolverConfig, SolverError, TransportScheme};
use crate::sphere::{AngularGrid, Dim, Direction, SphereError};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// Errors from configuration parsing, artifact I/O, or the underlying
/// numerics.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("missing required config key `{0}`")]
    MissingKey(String),
    #[error("config key `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("baseline `{0}` not found; run with --record-baseline first")]
    MissingBaseline(String),
    #[error("snapshot {path}: {msg}")]
    BadSnapshot { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Particle(#[from] ParticleError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// Where a recipe writes artifacts and whether it may record baselines.
#[derive(Clone, Debug)]
pub struct RunIo {
    out_dir: PathBuf,
    record_baseline: bool,
    baselines_dir: PathBuf,
}

impl RunIo {
    /// Artifacts go to `out_dir`; baselines are read from (and, with
    /// `--record-baseline`, written to) the crate's committed store.
    pub fn new(out_dir: impl Into<PathBuf>, record_baseline: bool) -> Self {
        Self {
            out_dir: out_dir.into(),
            record_baseline,
            baselines_dir: default_baselines_dir(),
        }
    }

    /// Overrides the baseline store (tests use temporary directories).
    pub fn with_baselines_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.baselines_dir = dir.into();
        self
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn record_baseline(&self) -> bool {
        self.record_baseline
    }

    pub fn baselines_dir(&self) -> &Path {
        &self.baselines_dir
    }

    fn ensure_out_dir(&self) -> Result<(), ExperimentError> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// The committed baseline store shipped with the crate.
pub fn default_baselines_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("baselines")
}

/// Builds the interaction frequency from `nu_family` (`constant` | `affine`
/// | `tabulated`) and its family-specific keys `nu_value`, `nu_base` +
/// `nu_slope`, or `nu_knots` + `nu_values`.
pub fn frequency_from(cfg: &mut RawConfig) -> Result<FrequencySpec, ExperimentError> {
    let family = cfg.take_str_or("nu_family", "constant")?;
    let spec = match family.as_str() {
        "constant" => FrequencySpec::constant(cfg.take_f64_or("nu_value", 1.0)?),
        "affine" => {
            FrequencySpec::affine(cfg.take_f64("nu_base")?, cfg.take_f64("nu_slope")?)
        }
        "tabulated" => FrequencySpec::tabulated(
            cfg.take_f64_list("nu_knots")?,
            cfg.take_f64_list("nu_values")?,
        ),
        other => {
            return Err(ExperimentError::BadValue {
                key: "nu_family".into(),
                msg: format!("unknown family `{other}` (constant | affine | tabulated)"),
            })
        }
    };
    spec.map_err(ExperimentError::from)
}

/// Builds the observation kernel from `kernel` (`dirac` | `top_hat` |
/// `gaussian`) plus `kernel_radius` / `kernel_width`.
pub fn kernel_from(cfg: &mut RawConfig) -> Result<KernelSpec, ExperimentError> {
    let shape = cfg.take_str_or("kernel", "dirac")?;
    match shape.as_str() {
        "dirac" => Ok(KernelSpec::Dirac),
        "top_hat" => Ok(KernelSpec::TopHat { radius: cfg.take_f64("kernel_radius")? }),
        "gaussian" => Ok(KernelSpec::Gaussian { width: cfg.take_f64("kernel_width")? }),
        other => Err(ExperimentError::BadValue {
            key: "kernel".into(),
            msg: format!("unknown kernel `{other}` (dirac | top_hat | gaussian)"),
        }),
    }
}

/// Builds the torus × circle grids from `dim_x`, `nx` (`ny`), `length_x`
/// (`length_y`), and `n_theta`.
pub fn grids_from(
    cfg: &mut RawConfig,
) -> Result<(SpatialGrid, Arc<AngularGrid>), ExperimentError> {
    let dims = cfg.take_usize_or("dim_x", 1)?;
    let nx = cfg.take_usize_or("nx", 32)?;
    let lx = cfg.take_f64_or("length_x", 1.0)?;
    let sgrid = match dims {
        1 => SpatialGrid::line(nx, lx)?,
        2 => {
            let ny = cfg.take_usize_or("ny", nx)?;
            let ly = cfg.take_f64_or("length_y", lx)?;
            SpatialGrid::plane(nx, ny, lx, ly)?
        }
        other => {
            return Err(ExperimentError::BadValue {
                key: "dim_x".into(),
                msg: format!("spatial dimension must be 1 or 2, got {other}"),
            })
        }
    };
    let agrid = Arc::new(AngularGrid::circle(cfg.take_usize_or("n_theta", 64)?)?);
    Ok((sgrid, agrid))
}

/// Assembles a full [`SolverConfig`] from the shared solver keys:
/// `mu`, `eps`, `dt`, `t_end`, `transport`, `picard_tol_rel`,
/// `picard_max_iter`, `alpha`, `report_every`, `snapshot_every`, plus the
/// frequency and kernel keys (see [`frequency_from`], [`kernel_from`]).
pub fn solver_config_from(cfg: &mut RawConfig) -> Result<SolverConfig, ExperimentError> {
    let nu = frequency_from(cfg)?;
    let mu = cfg.take_f64("mu")?;
    let mut sc = SolverConfig::new(nu, mu);
    sc.kernel = kernel_from(cfg)?;
    sc.eps = cfg.take_f64_or("eps", sc.eps)?;
    sc.dt = cfg.take_f64_or("dt", sc.dt)?;
    sc.t_end = cfg.take_f64_or("t_end", sc.t_end)?;
    let transport = cfg.take_str_or("transport", "spectral")?;
    sc.transport =
        TransportScheme::parse(&transport).ok_or_else(|| ExperimentError::BadValue {
            key: "transport".into(),
            msg: format!("unknown scheme `{transport}` (spectral | upwind)"),
        })?;
    sc.picard_tol_rel = cfg.take_f64_or("picard_tol_rel", sc.picard_tol_rel)?;
    sc.picard_max_iter = cfg.take_usize_or("picard_max_iter", sc.picard_max_iter)?;
    sc.alpha = cfg.take_f64_or("alpha", sc.alpha)?;
    sc.report_every = cfg.take_usize_or("report_every", sc.report_every)?;
    sc.snapshot_every = cfg.take_usize_or("snapshot_every", sc.snapshot_every)?;
    Ok(sc)
}

/// Builds the initial condition from `ic` (`uniform` | `seeded_uniform` |
/// `fvm` | `perturbed_fvm` | `file`) with `rho0`, `ic_director_angle`,
/// `ic_seed_amplitude`, `ic_modes`, `ic_amplitudes`, `ic_file`.
///
/// `perturbed_fvm` modulates the spatial density of the aligned
/// equilibrium: f₀ = ρ₀ (1 + Σ_k a_k cos(2π m_k x/L)) M_Ω(θ).
/// `seeded_uniform` is the isotropic state with a small first angular
/// harmonic: f₀ = ρ₀/2π · (1 + a cos(θ − θ₀)), the classic seed for the
/// alignment instability.
pub fn initial_condition_from(
    cfg: &mut RawConfig,
    nu: &FrequencySpec,
    mu: f64,
    sgrid: SpatialGrid,
    agrid: Arc<AngularGrid>,
) -> Result<DistributionField, ExperimentError> {
    let recipe = cfg.take_str_or("ic", "perturbed_fvm")?;
    let rho0 = cfg.take_f64_or("rho0", 1.0)?;
    match recipe.as_str() {
        "uniform" => {
            let level = rho0 / (2.0 * PI);
            Ok(DistributionField::from_fn(sgrid, agrid, 0.0, |_, _| level)?)
        }
        "seeded_uniform" => {
            let angle = cfg.take_f64_or("ic_director_angle", 0.0)?;
            let amp = cfg.take_f64_or("ic_seed_amplitude", 0.05)?;
            if !(amp.is_finite() && amp.abs() < 1.0) {
                return Err(ExperimentError::BadValue {
                    key: "ic_seed_amplitude".into(),
                    msg: format!("must satisfy |a| < 1 to keep f₀ positive, got {amp}"),
                });
            }
            let level = rho0 / (2.0 * PI);
            Ok(DistributionField::from_fn(sgrid, agrid, 0.0, move |_, omega| {
                level * (1.0 + amp * (omega.angle() - angle).cos())
            })?)
        }
        "fvm" | "perturbed_fvm" => {
            let angle = cfg.take_f64_or("ic_director_angle", 0.0)?;
            let director = Direction::from_angle(angle);
            let eq = Equilibrium::new(nu, mu, Dim::Two)?;
            if recipe == "fvm" {
                Ok(eq.field(sgrid, agrid, &director, |_| rho0, 0.0)?)
            } else {
                let modes = cfg.take_usize_list_or("ic_modes", &[1])?;
                let amps = cfg.take_f64_list_or("ic_amplitudes", &[0.1])?;
                if modes.len() != amps.len() {
                    return Err(ExperimentError::BadValue {
                        key: "ic_amplitudes".into(),
                        msg: format!(
                            "{} amplitudes for {} modes",
                            amps.len(),
                            modes.len()
                        ),
                    });
                }
                let lx = sgrid.length_axis(0);
                Ok(eq.field(sgrid, agrid, &director, move |x| {
                    let mut rho = rho0;
                    for (&m, &a) in modes.iter().zip(&amps) {
                        rho += rho0 * a * (2.0 * PI * m as f64 * x[0] / lx).cos();
                    }
                    rho
                }, 0.0)?)
            }
        }
        "file" => {
            let path = cfg.take_str("ic_file")?;
            let field = io::read_field_snapshot(Path::new(&path))?;
            if *field.spatial_grid() != sgrid || field.angular_grid().len() != agrid.len() {
                return Err(ExperimentError::BadValue {
                    key: "ic_file".into(),
                    msg: "snapshot grids do not match the configured grids".into(),
                });
            }
            Ok(field)
        }
        other => Err(ExperimentError::BadValue {
            key: "ic".into(),
            msg: format!(
                "unknown recipe `{other}` (uniform | seeded_uniform | fvm | perturbed_fvm | file)"
            ),
        }),
    }
}

/// Least-squares slope of y against x (used for log-log rates).
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}
