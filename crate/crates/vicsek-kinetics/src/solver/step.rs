//! Stepping internals: Strang transport halves, the angular IMEX substep,
//! the frozen-director fixed point, and the outer time loop.

use super::{PicardReport, SolverContext, SolverError, StepReport, TransportScheme};
use crate::field::{DistributionField, LpOrder, SpatialGrid};
use crate::model::{director_eps, flux_j_raw, force_ab_into};
use crate::model::MomentField;
use crate::sphere::AngularGrid;
use log::warn;

impl SolverContext {
    /// Free transport over Δt/2: every angular node advects the spatial
    /// slice along its own direction, axis by axis.
    fn transport_half(&mut self, values: &mut [f64]) {
        let half = 0.5 * self.config.dt;
        let nt = self.agrid.len();
        let nx = self.sgrid.n_axis(0);
        let ny = self.sgrid.n_axis(1);
        for j in 0..nt {
            let s = self.agrid.node(j).vector().x * half;
            if s == 0.0 {
                continue;
            }
            for iy in 0..ny {
                for ix in 0..nx {
                    self.ws.line[ix] = values[(ix * ny + iy) * nt + j];
                }
                self.advect_line(s, nx, 0);
                for ix in 0..nx {
                    values[(ix * ny + iy) * nt + j] = self.ws.line[ix];
                }
            }
        }
        if self.sgrid.dims() == 2 {
            for j in 0..nt {
                let s = self.agrid.node(j).vector().y * half;
                if s == 0.0 {
                    continue;
                }
                for ix in 0..nx {
                    for iy in 0..ny {
                        self.ws.line[iy] = values[(ix * ny + iy) * nt + j];
                    }
                    self.advect_line(s, ny, 1);
                    for iy in 0..ny {
                        values[(ix * ny + iy) * nt + j] = self.ws.line[iy];
                    }
                }
            }
        }
    }

    /// Advects `ws.line[..n]` by displacement `s` along the given axis.
    fn advect_line(&mut self, s: f64, n: usize, axis: usize) {
        let spectral = if axis == 0 {
            &self.spectral_x
        } else {
            self.spectral_y.as_ref().expect("y transform exists for 2-d grids")
        };
        match self.config.transport {
            TransportScheme::Spectral => {
                spectral.forward_into(&self.ws.line[..n], &mut self.ws.spec_line[..n]);
                spectral.apply_shift(&mut self.ws.spec_line[..n], s);
                spectral.inverse_real_into(&mut self.ws.spec_line[..n], &mut self.ws.line[..n]);
            }
            TransportScheme::Upwind => {
                let c = s / self.sgrid.dx(axis);
                self.ws.line2[..n].copy_from_slice(&self.ws.line[..n]);
                upwind_line(&self.ws.line2[..n], &mut self.ws.line[..n], c);
            }
        }
    }

    /// One IMEX Euler step of the frozen-axis angular operator in every
    /// spatial cell: explicit (pseudo-spectral) advection–reaction, implicit
    /// diffusion.
    ///
    /// The reaction coefficient is taken as the discrete divergence
    /// b = D_θ a of the sampled advection speed, which keeps the substep in
    /// exact divergence form: the flat mode is untouched and mass is
    /// conserved to roundoff.
    fn angular_substep(
        &mut self,
        values: &mut [f64],
        moments: &MomentField,
    ) -> Result<(), SolverError> {
        let sp = self.agrid.spectral()?;
        let nt = self.agrid.len();
        let dt = self.config.dt;
        let mu = self.config.mu;
        let nu = &self.config.nu;
        for cell in 0..self.sgrid.n_cells() {
            let axis = moments.director(cell);
            force_ab_into(&axis, nu, &self.agrid, &mut self.ws.a, &mut self.ws.b);
            sp.forward_into(&self.ws.a, &mut self.ws.spec_t);
            sp.apply_derivative(&mut self.ws.spec_t);
            sp.inverse_real_into(&mut self.ws.spec_t, &mut self.ws.b);
            let f = &mut values[cell * nt..(cell + 1) * nt];
            sp.forward_into(f, &mut self.ws.spec_f);
            self.ws.spec_t.copy_from_slice(&self.ws.spec_f);
            sp.apply_derivative(&mut self.ws.spec_t);
            sp.inverse_real_into(&mut self.ws.spec_t, &mut self.ws.df);
            for j in 0..nt {
                self.ws.r[j] = -(self.ws.a[j] * self.ws.df[j] + self.ws.b[j] * f[j]);
            }
            sp.forward_into(&self.ws.r, &mut self.ws.spec_t);
            for k in 0..nt {
                self.ws.spec_f[k] += self.ws.spec_t[k] * dt;
            }
            sp.apply_implicit_diffusion(&mut self.ws.spec_f, mu, dt);
            sp.inverse_real_into(&mut self.ws.spec_f, f);
        }
        Ok(())
    }

    fn linear_step_raw(
        &mut self,
        values: &mut [f64],
        moments: &MomentField,
    ) -> Result<(), SolverError> {
        self.transport_half(values);
        self.angular_substep(values, moments)?;
        self.transport_half(values);
        Ok(())
    }

    /// One full Strang step with frozen directors: transport(Δt/2),
    /// angular IMEX(Δt), transport(Δt/2). The moment field must carry
    /// directors (see [`director_eps`]).
    pub fn linear_step(
        &mut self,
        field: &DistributionField,
        omega_frozen: &MomentField,
    ) -> Result<DistributionField, SolverError> {
        self.check_field(field)?;
        if omega_frozen.directors().is_none() {
            return Err(SolverError::BadParameter(
                "moment field carries no directors; apply director_eps before linear_step".into(),
            ));
        }
        if omega_frozen.n_cells() != self.sgrid.n_cells() {
            return Err(SolverError::GridMismatch);
        }
        let mut values = field.values().to_vec();
        self.linear_step_raw(&mut values, omega_frozen)?;
        let t = field.time() + self.config.dt;
        Ok(DistributionField::new(self.sgrid, self.agrid.clone(), values, t)?)
    }

    /// Frozen-director fixed point for one time step, on raw buffers.
    fn picard_raw(
        &mut self,
        f_values: &mut Vec<f64>,
        tol: f64,
    ) -> Result<PicardOutcome, SolverError> {
        // the leading transport half-step is director-independent: do it once
        let mut h = f_values.clone();
        self.transport_half(&mut h);
        let mut g = f_values.clone();
        let mut residuals = Vec::new();
        let mut converged = false;
        let mut min_abs_j = f64::INFINITY;
        for _ in 0..self.config.picard_max_iter {
            let moments = director_eps(
                flux_j_raw(&g, &self.sgrid, &self.agrid, &self.kernel)?,
                self.config.eps,
            )?;
            min_abs_j = moments.min_abs_flux();
            let mut g_new = h.clone();
            self.angular_substep(&mut g_new, &moments)?;
            self.transport_half(&mut g_new);
            let res = l1_distance_raw(&g_new, &g, &self.sgrid, &self.agrid);
            residuals.push(res);
            g = g_new;
            if res <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            warn!(
                "director fixed point missed tol {tol:e} within {} iterations (last residual {:e}); continuing with the last iterate",
                self.config.picard_max_iter,
                residuals.last().copied().unwrap_or(f64::NAN),
            );
        }
        *f_values = g;
        Ok(PicardOutcome { iterations: residuals.len(), residuals, converged, min_abs_j })
    }

    /// Advances a field by one Δt through the frozen-director fixed point.
    pub fn picard_solve(
        &mut self,
        field: &DistributionField,
    ) -> Result<(DistributionField, PicardReport), SolverError> {
        self.check_field(field)?;
        let tol = self.config.picard_tol_rel * field.mass().abs();
        let mut values = field.values().to_vec();
        let out = self.picard_raw(&mut values, tol)?;
        let t = field.time() + self.config.dt;
        let next = DistributionField::new(self.sgrid, self.agrid.clone(), values, t)?;
        Ok((
            next,
            PicardReport {
                iterations: out.iterations,
                residuals: out.residuals,
                converged: out.converged,
            },
        ))
    }

    /// Runs the dynamics from `f0` to `t_end`, reporting diagnostics along
    /// the way. Non-finite values and serious positivity losses abort with
    /// an error naming the step; the final state is re-validated through the
    /// checked field constructor.
    pub fn evolve(&mut self, f0: &DistributionField) -> Result<EvolveOutcome, SolverError> {
        self.check_field(f0)?;
        let dt = self.config.dt;
        let t_end = self.config.t_end;
        let n_steps = (t_end / dt).round() as usize;
        if (n_steps as f64 * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
            return Err(SolverError::BadParameter(format!(
                "t_end = {t_end} is not an integer multiple of dt = {dt}"
            )));
        }
        let mass0 = f0.mass();
        if !(mass0 > 0.0) {
            return Err(SolverError::BadParameter(format!(
                "initial mass must be positive, got {mass0}"
            )));
        }
        let tol = self.config.picard_tol_rel * mass0;

        let mut values = f0.values().to_vec();
        let m0 = flux_j_raw(&values, &self.sgrid, &self.agrid, &self.kernel)?;
        let mut reports = vec![self.report_row(&values, 0.0, m0.min_abs_flux(), 0, 0.0)];
        let mut snapshots = Vec::new();
        let mut min_ratio = positivity_ratio(&values);
        let mut mass_drift: f64 = 0.0;
        let mut min_abs_j_run = m0.min_abs_flux();
        let mut alpha_warned = false;

        for step in 1..=n_steps {
            let out = self.picard_raw(&mut values, tol)?;
            let t = step as f64 * dt;

            let mut min = f64::INFINITY;
            let mut linf = 0.0f64;
            for (idx, &v) in values.iter().enumerate() {
                if !v.is_finite() {
                    let nt = self.agrid.len();
                    return Err(SolverError::NonFinite {
                        time: t,
                        step,
                        cell: idx / nt,
                        node: idx % nt,
                    });
                }
                min = min.min(v);
                linf = linf.max(v.abs());
            }
            let floor = -1e-8 * linf;
            if min < floor {
                return Err(SolverError::PositivityLost { time: t, min, floor });
            }
            if linf > 0.0 {
                min_ratio = min_ratio.min(min / linf);
            }
            min_abs_j_run = min_abs_j_run.min(out.min_abs_j);
            if self.config.alpha > 0.0 && out.min_abs_j < self.config.alpha && !alpha_warned {
                warn!(
                    "min |J| = {:e} dropped below the non-degeneracy threshold alpha = {:e} at t = {t}",
                    out.min_abs_j, self.config.alpha,
                );
                alpha_warned = true;
            }

            if step % self.config.report_every == 0 || step == n_steps {
                let row = self.report_row(
                    &values,
                    t,
                    out.min_abs_j,
                    out.iterations,
                    out.residuals.last().copied().unwrap_or(0.0),
                );
                mass_drift = mass_drift.max(((row.mass - mass0) / mass0).abs());
                reports.push(row);
            }
            if self.config.snapshot_every > 0 && step % self.config.snapshot_every == 0 {
                snapshots.push(DistributionField::from_raw_unchecked(
                    self.sgrid,
                    self.agrid.clone(),
                    values.clone(),
                    t,
                ));
            }
        }

        let final_field =
            DistributionField::new(self.sgrid, self.agrid.clone(), values, n_steps as f64 * dt)?;
        Ok(EvolveOutcome {
            final_field,
            reports,
            snapshots,
            min_density_ratio: min_ratio,
            mass_drift_rel: mass_drift,
            min_abs_j_run,
        })
    }

    fn report_row(
        &self,
        values: &[f64],
        time: f64,
        min_abs_j: f64,
        picard_iters: usize,
        picard_residual: f64,
    ) -> StepReport {
        let tmp = DistributionField::from_raw_unchecked(
            self.sgrid,
            self.agrid.clone(),
            values.to_vec(),
            time,
        );
        StepReport {
            time,
            mass: tmp.mass(),
            l1: tmp.lp_norm(LpOrder::Finite(1.0)).expect("order 1 is valid"),
            l2: tmp.lp_norm(LpOrder::Finite(2.0)).expect("order 2 is valid"),
            linf: tmp.lp_norm(LpOrder::Infinity).expect("sup norm is valid"),
            angular_energy_p2: tmp.angular_energy(2.0).expect("circle grid"),
            min_abs_j,
            picard_iters,
            picard_residual,
        }
    }
}

struct PicardOutcome {
    iterations: usize,
    residuals: Vec<f64>,
    converged: bool,
    min_abs_j: f64,
}

/// Result of a full [`SolverContext::evolve`] run.
#[derive(Debug)]
pub struct EvolveOutcome {
    pub final_field: DistributionField,
    /// Diagnostic rows: initial state, every `report_every`-th step, final
    /// state.
    pub reports: Vec<StepReport>,
    /// Retained intermediate fields (per `snapshot_every`).
    pub snapshots: Vec<DistributionField>,
    /// Worst positivity margin min f / ‖f‖∞ seen at any step.
    pub min_density_ratio: f64,
    /// Largest |mass(t) − mass(0)|/mass(0) over the reported rows.
    pub mass_drift_rel: f64,
    /// Smallest min|J| over all steps (against the α threshold).
    pub min_abs_j_run: f64,
}

/// One conservative first-order upwind update of a periodic line, Courant
/// number c = s/Δx (|c| ≤ 1 enforced at context construction).
fn upwind_line(input: &[f64], out: &mut [f64], c: f64) {
    let n = input.len();
    if c >= 0.0 {
        for i in 0..n {
            let up = input[(i + n - 1) % n];
            out[i] = input[i] - c * (input[i] - up);
        }
    } else {
        for i in 0..n {
            let down = input[(i + 1) % n];
            out[i] = input[i] - c * (down - input[i]);
        }
    }
}

fn l1_distance_raw(a: &[f64], b: &[f64], sgrid: &SpatialGrid, agrid: &AngularGrid) -> f64 {
    let w = agrid.weights();
    let nt = w.len();
    let mut total = 0.0;
    for cell in 0..sgrid.n_cells() {
        let ai = &a[cell * nt..(cell + 1) * nt];
        let bi = &b[cell * nt..(cell + 1) * nt];
        total += ai
            .iter()
            .zip(bi)
            .zip(w)
            .map(|((x, y), w)| (x - y).abs() * w)
            .sum::<f64>();
    }
    total * sgrid.cell_volume()
}

fn positivity_ratio(values: &[f64]) -> f64 {
    let mut min = f64::INFINITY;
    let mut linf = 0.0f64;
    for &v in values {
        min = min.min(v);
        linf = linf.max(v.abs());
    }
    if linf > 0.0 {
        min / linf
    } else {
        0.0
    }
}
