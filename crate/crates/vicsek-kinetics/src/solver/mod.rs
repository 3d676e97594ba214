//! Deterministic solver for the regularized mean-field dynamics on
//! 𝕋^{d_x} × S¹: Strang splitting of free transport against the angular
//! alignment-diffusion operator, wrapped in a frozen-director fixed-point
//! iteration per time step.
//!
//! One time step of [`SolverContext::picard_solve`] computes
//!
//!   g⁰ = f(t);  Ωᵏ = director_eps(flux_J(gᵏ));  gᵏ⁺¹ = linear_step(f(t), Ωᵏ)
//!
//! until the L¹ increment falls below the tolerance, then accepts f(t+Δt) =
//! gᵏ⁺¹. [`SolverContext::linear_step`] is the frozen-director propagator:
//! transport half-step ∘ angular IMEX step ∘ transport half-step, spectrally
//! discretized in the angle and (by default) in space.

mod step;

pub use step::EvolveOutcome;

use crate::field::{DistributionField, FieldError, SpatialGrid};
use crate::fourier::Spectral;
use crate::model::{FrequencySpec, KernelOnGrid, KernelSpec, ModelError};
use crate::sphere::{AngularGrid, Dim, SphereError};
use rustfft::num_complex::Complex;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("the solver integrates circle-valued velocities only (d = 2 angular grid)")]
    CircleOnly,
    #[error("unstable time step: {condition} is violated with ratio {ratio:.4} > 1")]
    Unstable { condition: &'static str, ratio: f64 },
    #[error("invalid solver parameter: {0}")]
    BadParameter(String),
    #[error("field lives on different grids than this solver context")]
    GridMismatch,
    #[error("non-finite density at t = {time} (step {step}), first at cell {cell}, node {node}")]
    NonFinite { time: f64, step: usize, cell: usize, node: usize },
    #[error("positivity lost at t = {time}: min f = {min:e} below floor {floor:e}")]
    PositivityLost { time: f64, min: f64, floor: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// Spatial transport discretization for the Strang half-steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportScheme {
    /// Exact phase-shift advection in Fourier space: semi-Lagrangian along
    /// the characteristics, conservative, no CFL restriction.
    Spectral,
    /// First-order upwind differences; monotone, subject to the CFL
    /// condition (Δt/2)·max|ω_axis|/Δx ≤ 1 per axis.
    Upwind,
}

impl TransportScheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spectral" => Some(TransportScheme::Spectral),
            "upwind" => Some(TransportScheme::Upwind),
            _ => None,
        }
    }
}

impl std::fmt::Display for TransportScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransportScheme::Spectral => write!(f, "spectral"),
            TransportScheme::Upwind => write!(f, "upwind"),
        }
    }
}

/// Full parameter set of a solver run.
#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    pub nu: FrequencySpec,
    pub mu: f64,
    pub kernel: KernelSpec,
    /// Director regularization ε ≥ 0 (0 = unregularized, fails on degenerate
    /// flux).
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub transport: TransportScheme,
    /// Fixed-point tolerance relative to the initial mass.
    pub picard_tol_rel: f64,
    pub picard_max_iter: usize,
    /// Non-degeneracy threshold α to monitor: a warning is logged whenever
    /// min|J| drops below it (0 disables monitoring).
    pub alpha: f64,
    /// Steps between rows of the report series (the initial and final states
    /// are always reported).
    pub report_every: usize,
    /// Steps between retained field snapshots (0 = none).
    pub snapshot_every: usize,
}

impl SolverConfig {
    /// Defaults for everything except the physics (ν, μ).
    pub fn new(nu: FrequencySpec, mu: f64) -> Self {
        SolverConfig {
            nu,
            mu,
            kernel: KernelSpec::Dirac,
            eps: 1e-6,
            dt: 1e-3,
            t_end: 1.0,
            transport: TransportScheme::Spectral,
            picard_tol_rel: 1e-10,
            picard_max_iter: 25,
            alpha: 0.0,
            report_every: 1,
            snapshot_every: 0,
        }
    }
}

/// Convergence record of one frozen-director fixed-point solve.
#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    /// Iterations performed (each produces one residual).
    pub iterations: usize,
    /// L¹ increments ‖gᵏ⁺¹ − gᵏ‖₁ per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// One row of the per-step diagnostic series.
#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub time: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// ∫∫ |∇_ω f|² dx dω (the p = 2 angular Dirichlet energy).
    pub angular_energy_p2: f64,
    pub min_abs_j: f64,
    pub picard_iters: usize,
    pub picard_residual: f64,
}

impl StepReport {
    /// Canonical column order of the report series.
    pub const COLUMNS: [&'static str; 9] = [
        "time",
        "mass",
        "l1",
        "l2",
        "linf",
        "angular_energy_p2",
        "min_abs_J",
        "picard_iters",
        "picard_residual",
    ];
}

/// Reusable state for stepping fields on one grid pair: validated
/// configuration, kernel transform, spatial/angular spectral plans, and
/// scratch buffers.
pub struct SolverContext {
    config: SolverConfig,
    sgrid: SpatialGrid,
    agrid: Arc<AngularGrid>,
    kernel: KernelOnGrid,
    spectral_x: Spectral,
    spectral_y: Option<Spectral>,
    ws: Workspace,
}

pub(crate) struct Workspace {
    /// Angular scratch (length n_θ).
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub df: Vec<f64>,
    pub r: Vec<f64>,
    pub spec_f: Vec<Complex<f64>>,
    pub spec_t: Vec<Complex<f64>>,
    /// Spatial scratch (length max(n_x, n_y)).
    pub line: Vec<f64>,
    pub line2: Vec<f64>,
    pub spec_line: Vec<Complex<f64>>,
}

impl SolverContext {
    pub fn new(
        config: SolverConfig,
        sgrid: SpatialGrid,
        agrid: Arc<AngularGrid>,
    ) -> Result<Self, SolverError> {
        if agrid.dim() != Dim::Two {
            return Err(SolverError::CircleOnly);
        }
        let p = |msg: String| Err(SolverError::BadParameter(msg));
        if !(config.mu.is_finite() && config.mu > 0.0) {
            return p(format!("mu must be finite and > 0, got {}", config.mu));
        }
        if !(config.dt.is_finite() && config.dt > 0.0) {
            return p(format!("dt must be finite and > 0, got {}", config.dt));
        }
        if !(config.t_end.is_finite() && config.t_end >= 0.0) {
            return p(format!("t_end must be finite and >= 0, got {}", config.t_end));
        }
        if !(config.eps.is_finite() && config.eps >= 0.0) {
            return p(format!("eps must be finite and >= 0, got {}", config.eps));
        }
        if !(config.picard_tol_rel.is_finite() && config.picard_tol_rel > 0.0) {
            return p(format!("picard_tol_rel must be > 0, got {}", config.picard_tol_rel));
        }
        if config.picard_max_iter == 0 {
            return p("picard_max_iter must be >= 1".into());
        }
        if config.report_every == 0 {
            return p("report_every must be >= 1".into());
        }
        if !(config.alpha.is_finite() && config.alpha >= 0.0) {
            return p(format!("alpha must be finite and >= 0, got {}", config.alpha));
        }
        config.kernel.validate()?;

        // A-priori stability of the angular IMEX substep, from the sup norms
        // of the coefficients over every admissible frozen axis (|Ω̄| ≤ 1):
        // sup|a| ≤ ‖ν‖∞ and sup|b| ≤ ‖ν′‖∞ + ‖ν‖∞.
        let sup_a = config.nu.sup_nu();
        let sup_b = config.nu.sup_nu_prime() + config.nu.sup_nu();
        let adv_ratio = config.dt * sup_a * sup_a / (2.0 * config.mu);
        if adv_ratio > 1.0 {
            return Err(SolverError::Unstable {
                condition: "angular advection: dt·sup|ψ₁·τ|² ≤ 2μ",
                ratio: adv_ratio,
            });
        }
        let reaction_ratio = config.dt * sup_b;
        if reaction_ratio > 1.0 {
            return Err(SolverError::Unstable {
                condition: "explicit reaction: dt·sup|ψ₂+ψ₃| ≤ 1",
                ratio: reaction_ratio,
            });
        }
        if config.transport == TransportScheme::Upwind {
            for axis in 0..sgrid.dims() {
                let cfl = 0.5 * config.dt / sgrid.dx(axis);
                if cfl > 1.0 {
                    return Err(SolverError::Unstable {
                        condition: "upwind transport CFL: (dt/2)·max|ω|/Δx ≤ 1",
                        ratio: cfl,
                    });
                }
            }
        }

        let kernel = config.kernel.on_grid(&sgrid)?;
        let spectral_x = Spectral::new(sgrid.n_axis(0), sgrid.length_axis(0));
        let spectral_y = (sgrid.dims() == 2)
            .then(|| Spectral::new(sgrid.n_axis(1), sgrid.length_axis(1)));
        let nt = agrid.len();
        let nline = sgrid.n_axis(0).max(sgrid.n_axis(1));
        let ws = Workspace {
            a: vec![0.0; nt],
            b: vec![0.0; nt],
            df: vec![0.0; nt],
            r: vec![0.0; nt],
            spec_f: vec![Complex::default(); nt],
            spec_t: vec![Complex::default(); nt],
            line: vec![0.0; nline],
            line2: vec![0.0; nline],
            spec_line: vec![Complex::default(); nline],
        };
        Ok(SolverContext { config, sgrid, agrid, kernel, spectral_x, spectral_y, ws })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn spatial_grid(&self) -> &SpatialGrid {
        &self.sgrid
    }

    pub fn angular_grid(&self) -> &Arc<AngularGrid> {
        &self.agrid
    }

    /// The observation kernel sampled on the solver's spatial grid.
    pub fn kernel(&self) -> &KernelOnGrid {
        &self.kernel
    }

    pub(crate) fn check_field(&self, field: &DistributionField) -> Result<(), SolverError> {
        let ok = *field.spatial_grid() == self.sgrid
            && field.angular_grid().len() == self.agrid.len()
            && field.angular_grid().dim() == self.agrid.dim();
        if ok {
            Ok(())
        } else {
            Err(SolverError::GridMismatch)
        }
    }

}
