//! Stochastic particle system: self-propelled agents on a periodic domain
//! that align with the mean direction of their metric neighbors under
//! angular Brownian noise.
//!
//! Each of the N particles carries a position on the torus and a unit
//! direction. One step of [`ParticleEnsemble::sde_step`]:
//!
//! 1. J̄_i = Σ_{|X_j−X_i| ≤ R} ω_j (self included, periodic distance),
//! 2. Ω̄_i = J̄_i/|J̄_i| (a [`TiePolicy`] decides the |J̄| = 0 branch),
//! 3. ω_i ← normalize(ω_i + Δt ν(ω_i·Ω̄_i) P_{ω_i⊥}Ω̄_i + √(2μΔt) P_{ω_i⊥}ξ_i),
//! 4. X_i ← wrap(X_i + Δt ω_i′) with the updated direction.
//!
//! The projection-with-renormalization update keeps directions exactly unit
//! and supplies the Stratonovich drift correction of sphere Brownian motion
//! to leading order in Δt.
//!
//! Randomness is counter-based: every (seed, step, particle) triple maps to
//! a fixed block of the ChaCha stream, so trajectories are bit-reproducible
//! and independent of traversal order.

use crate::field::{DistributionField, FieldError, SpatialGrid};
use crate::model::FrequencySpec;
use crate::sphere::{AngularGrid, Dim, Direction, SphereError};
use nalgebra::Vector3;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Errors from the particle module.
#[derive(Debug, Error)]
pub enum ParticleError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("non-finite {what} for particle {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("operation requires circle directions (d = 2)")]
    CircleOnly,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// Behaviour of the alignment target when the neighbor flux vanishes
/// exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Ω̄_i = ω_i, which makes the drift vanish (P_{ω⊥}ω = 0). Default.
    KeepDirection,
    /// Ω̄_i drawn uniformly from the sphere.
    RandomDirection,
}

/// Parameters of the interacting particle step.
#[derive(Clone, Debug, Serialize)]
pub struct SimParams {
    pub nu: FrequencySpec,
    pub mu: f64,
    pub dt: f64,
    /// Metric interaction radius R (length units).
    pub radius: f64,
    pub tie_policy: TiePolicy,
}

impl SimParams {
    pub fn new(nu: FrequencySpec, mu: f64, dt: f64, radius: f64) -> Result<Self, ParticleError> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(ParticleError::BadParameter(format!("mu must be >= 0, got {mu}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ParticleError::BadParameter(format!("dt must be > 0, got {dt}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ParticleError::BadParameter(format!("radius must be > 0, got {radius}")));
        }
        let step_angle = (2.0 * mu * dt).sqrt();
        if step_angle > 0.5 {
            log::warn!(
                "rms angular increment sqrt(2 mu dt) = {step_angle:.3} rad leaves the small-angle regime; consider a smaller dt"
            );
        }
        Ok(Self { nu, mu, dt, radius, tie_policy: TiePolicy::KeepDirection })
    }

    pub fn with_tie_policy(mut self, tie_policy: TiePolicy) -> Self {
        self.tie_policy = tie_policy;
        self
    }
}

/// Periodic spatial domain for particles (no grid resolution attached).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Torus {
    dims: usize,
    length: [f64; 2],
}

impl Torus {
    pub fn line(length: f64) -> Result<Self, ParticleError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(ParticleError::BadParameter(format!("length must be > 0, got {length}")));
        }
        Ok(Self { dims: 1, length: [length, 1.0] })
    }

    pub fn plane(lx: f64, ly: f64) -> Result<Self, ParticleError> {
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return Err(ParticleError::BadParameter(format!(
                "side lengths must be > 0, got {lx} x {ly}"
            )));
        }
        Ok(Self { dims: 2, length: [lx, ly] })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn length_axis(&self, a: usize) -> f64 {
        self.length[a]
    }

    /// Wraps a point onto [0, L) per active axis; the degenerate axis of a
    /// line domain is forced to 0.
    pub fn wrap(&self, x: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0, 0.0];
        for a in 0..self.dims {
            out[a] = x[a].rem_euclid(self.length[a]);
            if out[a] == self.length[a] {
                out[a] = 0.0;
            }
        }
        out
    }

    /// True when a spatial grid discretizes exactly this torus.
    pub fn matches_grid(&self, grid: &SpatialGrid) -> bool {
        self.dims == grid.dims()
            && (0..self.dims).all(|a| (self.length[a] - grid.length_axis(a)).abs() < 1e-12)
    }

    fn from_grid(grid: &SpatialGrid) -> Self {
        Self {
            dims: grid.dims(),
            length: [grid.length_axis(0), if grid.dims() == 2 { grid.length_axis(1) } else { 1.0 }],
        }
    }

    /// Shortest signed displacement a − b on the torus, per axis.
    fn min_image(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let mut d = [0.0, 0.0];
        for ax in 0..self.dims {
            let l = self.length[ax];
            let raw = a[ax] - b[ax];
            d[ax] = raw - l * (raw / l).round();
        }
        d
    }
}

/// N interacting particles: wrapped positions and unit directions.
#[derive(Clone, Debug)]
pub struct ParticleEnsemble {
    positions: Vec<[f64; 2]>,
    directions: Vec<Vector3<f64>>,
    torus: Torus,
    dim: Dim,
    time: f64,
    seed: u64,
    step_count: u64,
}

/// ChaCha words consumed per particle per step (upper bound); the counter
/// stride that keeps per-particle streams disjoint.
const WORDS_PER_PARTICLE: u128 = 16;
/// Stream id reserved for ensemble sampling (steps use 0, 1, 2, …).
const SAMPLING_STREAM: u64 = u64::MAX;

impl ParticleEnsemble {
    /// Builds an ensemble from explicit states. Positions are wrapped;
    /// directions must be unit within 1e-9 (then renormalized exactly) and
    /// planar for circle ensembles.
    pub fn from_parts(
        positions: Vec<[f64; 2]>,
        directions: Vec<Vector3<f64>>,
        torus: Torus,
        dim: Dim,
        seed: u64,
    ) -> Result<Self, ParticleError> {
        if positions.is_empty() || positions.len() != directions.len() {
            return Err(ParticleError::BadParameter(format!(
                "need matching non-empty state lists, got {} positions and {} directions",
                positions.len(),
                directions.len()
            )));
        }
        let mut wrapped = Vec::with_capacity(positions.len());
        for (i, &x) in positions.iter().enumerate() {
            if !(x[0].is_finite() && x[1].is_finite()) {
                return Err(ParticleError::NonFinite { what: "position", index: i });
            }
            wrapped.push(torus.wrap(x));
        }
        let mut units = Vec::with_capacity(directions.len());
        for (i, v) in directions.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(ParticleError::NonFinite { what: "direction", index: i });
            }
            let norm = v.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(ParticleError::BadParameter(format!(
                    "direction {i} has norm {norm}, expected 1"
                )));
            }
            if dim == Dim::Two && v.z != 0.0 {
                return Err(ParticleError::BadParameter(format!(
                    "direction {i} has z = {} on a circle ensemble",
                    v.z
                )));
            }
            // directions already unit to roundoff keep their exact bits, so
            // snapshot round-trips reproduce the state bit for bit
            units.push(if (norm - 1.0).abs() <= 1e-14 { *v } else { v / norm });
        }
        Ok(Self { positions: wrapped, directions: units, torus, dim, time: 0.0, seed, step_count: 0 })
    }

    /// Uniform positions, all directions equal.
    pub fn sample_aligned(
        n: usize,
        torus: Torus,
        direction: &Direction,
        seed: u64,
    ) -> Result<Self, ParticleError> {
        let mut rng = sampling_rng(seed);
        let positions = sample_positions(&mut rng, n, &torus)?;
        let directions = vec![direction.vector(); n];
        Self::from_parts(positions, directions, torus, direction.dim(), seed)
    }

    /// Uniform positions and uniform directions.
    pub fn sample_uniform(
        n: usize,
        torus: Torus,
        dim: Dim,
        seed: u64,
    ) -> Result<Self, ParticleError> {
        let mut rng = sampling_rng(seed);
        let positions = sample_positions(&mut rng, n, &torus)?;
        let directions = (0..n).map(|_| random_unit(&mut rng, dim)).collect();
        Self::from_parts(positions, directions, torus, dim, seed)
    }

    /// Draws (X_i, ω_i) i.i.d. from a kinetic density (circle grids only):
    /// cells and angular nodes by their probability masses, then uniformly
    /// within each node-centered bin, so the expected empirical histogram on
    /// the same grids reproduces the field.
    pub fn sample_from_field(
        field: &DistributionField,
        n: usize,
        seed: u64,
    ) -> Result<Self, ParticleError> {
        let agrid = field.angular_grid();
        if agrid.dim() != Dim::Two {
            return Err(ParticleError::CircleOnly);
        }
        if n == 0 {
            return Err(ParticleError::BadParameter("need at least one particle".into()));
        }
        let sgrid = *field.spatial_grid();
        let torus = Torus::from_grid(&sgrid);
        let weights = agrid.weights();
        let nt = agrid.len();
        let n_cells = sgrid.n_cells();
        // cumulative probability over (cell, node) bins
        let mut cdf = Vec::with_capacity(n_cells * nt);
        let mut acc = 0.0;
        for cell in 0..n_cells {
            for (j, &w) in weights.iter().enumerate() {
                acc += field.value(cell, j).max(0.0) * w;
                cdf.push(acc);
            }
        }
        let total = acc;
        if !(total > 0.0) {
            return Err(ParticleError::BadParameter("cannot sample from a zero field".into()));
        }
        let dtheta = 2.0 * PI / nt as f64;
        let mut rng = sampling_rng(seed);
        let mut positions = Vec::with_capacity(n);
        let mut directions = Vec::with_capacity(n);
        for _ in 0..n {
            let u = uniform(&mut rng) * total;
            let mut bin = cdf.partition_point(|&c| c <= u);
            if bin >= cdf.len() {
                bin = cdf.len() - 1;
            }
            let cell = bin / nt;
            let node = bin % nt;
            let base = sgrid.position(cell);
            let mut x = [0.0, 0.0];
            for a in 0..sgrid.dims() {
                x[a] = base[a] + (uniform(&mut rng) - 0.5) * sgrid.dx(a);
            }
            positions.push(torus.wrap(x));
            let theta = agrid.thetas()[node] + (uniform(&mut rng) - 0.5) * dtheta;
            directions.push(Vector3::new(theta.cos(), theta.sin(), 0.0));
        }
        Self::from_parts(positions, directions, torus, Dim::Two, seed)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn directions(&self) -> &[Vector3<f64>] {
        &self.directions
    }

    /// Restores bookkeeping when reconstructing an ensemble from a snapshot.
    pub fn with_clock(mut self, time: f64, step_count: u64) -> Self {
        self.time = time;
        self.step_count = step_count;
        self
    }

    /// Global order parameter |Σ_i ω_i|/N ∈ [0, 1].
    pub fn order_parameter(&self) -> f64 {
        let sum: Vector3<f64> = self.directions.iter().sum();
        sum.norm() / self.len() as f64
    }

    /// Neighbor flux of one particle by direct summation (O(N)).
    pub fn neighbor_flux(&self, radius: f64, i: usize) -> Vector3<f64> {
        let r2 = radius * radius;
        let xi = self.positions[i];
        let mut j = Vector3::zeros();
        for (x, omega) in self.positions.iter().zip(&self.directions) {
            let d = self.torus.min_image(xi, *x);
            if d[0] * d[0] + d[1] * d[1] <= r2 {
                j += *omega;
            }
        }
        j
    }

    /// Neighbor fluxes of all particles: windowed prefix sums on a line
    /// (O(N log N)), cell lists on a plane.
    pub fn neighbor_fluxes(&self, radius: f64) -> Vec<Vector3<f64>> {
        if self.torus.dims() == 1 {
            self.fluxes_line(radius)
        } else {
            self.fluxes_plane(radius)
        }
    }

    fn fluxes_line(&self, radius: f64) -> Vec<Vector3<f64>> {
        let n = self.len();
        let l = self.torus.length_axis(0);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| {
            self.positions[a][0].partial_cmp(&self.positions[b][0]).expect("finite positions")
        });
        let xs: Vec<f64> = order.iter().map(|&i| self.positions[i][0]).collect();
        let mut prefix = vec![Vector3::zeros(); n + 1];
        for (k, &i) in order.iter().enumerate() {
            prefix[k + 1] = prefix[k] + self.directions[i];
        }
        let total = prefix[n];
        let range_sum = |lo_idx: usize, hi_idx: usize| prefix[hi_idx] - prefix[lo_idx];
        let mut out = vec![Vector3::zeros(); n];
        for i in 0..n {
            let x = self.positions[i][0];
            out[i] = if 2.0 * radius >= l {
                total
            } else {
                let lo = x - radius;
                let hi = x + radius;
                // first index with xs >= v / first index with xs > v
                let lb = |v: f64| xs.partition_point(|&p| p < v);
                let ub = |v: f64| xs.partition_point(|&p| p <= v);
                if lo < 0.0 {
                    range_sum(0, ub(hi)) + range_sum(lb(lo + l), n)
                } else if hi >= l {
                    range_sum(lb(lo), n) + range_sum(0, ub(hi - l))
                } else {
                    range_sum(lb(lo), ub(hi))
                }
            };
        }
        out
    }

    fn fluxes_plane(&self, radius: f64) -> Vec<Vector3<f64>> {
        let n = self.len();
        let r2 = radius * radius;
        let (lx, ly) = (self.torus.length_axis(0), self.torus.length_axis(1));
        let ncx = ((lx / radius).floor() as usize).max(1);
        let ncy = ((ly / radius).floor() as usize).max(1);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); ncx * ncy];
        let cell_of = |x: [f64; 2]| {
            let cx = (((x[0] / lx) * ncx as f64) as usize).min(ncx - 1);
            let cy = (((x[1] / ly) * ncy as f64) as usize).min(ncy - 1);
            cx * ncy + cy
        };
        for (i, &x) in self.positions.iter().enumerate() {
            buckets[cell_of(x)].push(i);
        }
        let axis_neighbors = |c: usize, nc: usize| -> Vec<usize> {
            if nc >= 3 {
                vec![(c + nc - 1) % nc, c, (c + 1) % nc]
            } else {
                (0..nc).collect()
            }
        };
        let mut out = vec![Vector3::zeros(); n];
        for (i, &xi) in self.positions.iter().enumerate() {
            let home = cell_of(xi);
            let (hx, hy) = (home / ncy, home % ncy);
            let mut j = Vector3::zeros();
            for &cx in &axis_neighbors(hx, ncx) {
                for &cy in &axis_neighbors(hy, ncy) {
                    for &p in &buckets[cx * ncy + cy] {
                        let d = self.torus.min_image(xi, self.positions[p]);
                        if d[0] * d[0] + d[1] * d[1] <= r2 {
                            j += self.directions[p];
                        }
                    }
                }
            }
            out[i] = j;
        }
        out
    }

    /// One Euler–Maruyama step of the aligned self-propulsion dynamics.
    pub fn sde_step(&mut self, params: &SimParams) -> Result<(), ParticleError> {
        let n = self.len();
        // ν ≡ 0 kills the drift for every director, so skip the flux pass
        let fluxes =
            if params.nu.is_zero() { None } else { Some(self.neighbor_fluxes(params.radius)) };
        let noise_scale = (2.0 * params.mu * params.dt).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.step_count);
        for i in 0..n {
            rng.set_word_pos(WORDS_PER_PARTICLE * i as u128);
            let omega = self.directions[i];
            let xi = gaussian_vector(&mut rng, self.dim);
            let drift = match &fluxes {
                None => Vector3::zeros(),
                Some(j) => {
                    let norm = j[i].norm();
                    if norm == 0.0 {
                        match params.tie_policy {
                            // Ω̄ = ω makes P_{ω⊥}Ω̄ vanish identically
                            TiePolicy::KeepDirection => Vector3::zeros(),
                            TiePolicy::RandomDirection => {
                                let target = random_unit(&mut rng, self.dim);
                                alignment_drift(&omega, &target, &params.nu)
                            }
                        }
                    } else {
                        let target = j[i] / norm;
                        alignment_drift(&omega, &target, &params.nu)
                    }
                }
            };
            let tangent_noise = xi - omega.dot(&xi) * omega;
            let v = omega + params.dt * drift + noise_scale * tangent_noise;
            let norm = v.norm();
            if !norm.is_finite() || norm == 0.0 {
                return Err(ParticleError::NonFinite { what: "direction update", index: i });
            }
            self.directions[i] = v / norm;
        }
        for i in 0..n {
            let omega = self.directions[i];
            let x = self.positions[i];
            let moved = [x[0] + params.dt * omega.x, x[1] + params.dt * omega.y];
            if !(moved[0].is_finite() && moved[1].is_finite()) {
                return Err(ParticleError::NonFinite { what: "position update", index: i });
            }
            self.positions[i] = self.torus.wrap(moved);
        }
        self.step_count += 1;
        self.time += params.dt;
        Ok(())
    }

    /// Histogram of the ensemble on solver grids, normalized to total mass 1
    /// (the N-independent convention used for mean-field comparison), with
    /// optional periodic Gaussian smoothing — `bandwidth` is the Gaussian
    /// width as a fraction of each period (see [`gaussian_smooth`]).
    pub fn empirical_density(
        &self,
        sgrid: SpatialGrid,
        agrid: Arc<AngularGrid>,
        bandwidth: f64,
    ) -> Result<DistributionField, ParticleError> {
        if agrid.dim() != Dim::Two || self.dim != Dim::Two {
            return Err(ParticleError::CircleOnly);
        }
        if !self.torus.matches_grid(&sgrid) {
            return Err(ParticleError::BadParameter(format!(
                "grid domain {:?} does not match the particle torus {:?}",
                [sgrid.length_axis(0), sgrid.length_axis(1)],
                self.torus.length,
            )));
        }
        let nt = agrid.len();
        let weights = agrid.weights();
        let (nx, ny) = (sgrid.n_axis(0), sgrid.n_axis(1));
        let dtheta = 2.0 * PI / nt as f64;
        let mut values = vec![0.0; sgrid.n_cells() * nt];
        let inc = 1.0 / (self.len() as f64 * sgrid.cell_volume());
        for (x, omega) in self.positions.iter().zip(&self.directions) {
            let ix = nearest_bin(x[0], sgrid.dx(0), nx);
            let iy = if sgrid.dims() == 2 { nearest_bin(x[1], sgrid.dx(1), ny) } else { 0 };
            let theta = omega.y.atan2(omega.x).rem_euclid(2.0 * PI);
            let j = nearest_bin(theta, dtheta, nt);
            values[sgrid.cell_index(ix, iy) * nt + j] += inc / weights[j];
        }
        let field = DistributionField::new(sgrid, agrid, values, self.time)?;
        if bandwidth > 0.0 {
            gaussian_smooth(&field, bandwidth)
        } else {
            Ok(field)
        }
    }
}

/// Convolves a circle-grid field with a periodic Gaussian along every axis
/// (spatial axes and the angle). `bandwidth` is the Gaussian standard
/// deviation as a fraction of the axis period, so one number smooths all
/// axes at the same relative scale. The discrete kernel is normalized to
/// unit sum: total mass is preserved exactly.
pub fn gaussian_smooth(
    field: &DistributionField,
    bandwidth: f64,
) -> Result<DistributionField, ParticleError> {
    if !(bandwidth.is_finite() && bandwidth >= 0.0) {
        return Err(ParticleError::BadParameter(format!(
            "bandwidth must be >= 0, got {bandwidth}"
        )));
    }
    let sgrid = *field.spatial_grid();
    let agrid = field.angular_grid();
    if agrid.dim() != Dim::Two {
        return Err(ParticleError::CircleOnly);
    }
    let mut values = field.values().to_vec();
    if bandwidth == 0.0 {
        return Ok(DistributionField::new(sgrid, agrid.clone(), values, field.time())?);
    }
    let nt = agrid.len();
    let (nx, ny) = (sgrid.n_axis(0), sgrid.n_axis(1));
    // x axis
    let kernel = periodic_gaussian_kernel(nx, bandwidth);
    let mut line = vec![0.0; nx.max(ny).max(nt)];
    for iy in 0..ny {
        for j in 0..nt {
            for ix in 0..nx {
                line[ix] = values[(ix * ny + iy) * nt + j];
            }
            let smoothed = circular_convolve(&line[..nx], &kernel);
            for ix in 0..nx {
                values[(ix * ny + iy) * nt + j] = smoothed[ix];
            }
        }
    }
    // y axis
    if sgrid.dims() == 2 {
        let kernel = periodic_gaussian_kernel(ny, bandwidth);
        for ix in 0..nx {
            for j in 0..nt {
                for iy in 0..ny {
                    line[iy] = values[(ix * ny + iy) * nt + j];
                }
                let smoothed = circular_convolve(&line[..ny], &kernel);
                for iy in 0..ny {
                    values[(ix * ny + iy) * nt + j] = smoothed[iy];
                }
            }
        }
    }
    // angle
    let kernel = periodic_gaussian_kernel(nt, bandwidth);
    for cell in 0..sgrid.n_cells() {
        let chunk = &mut values[cell * nt..(cell + 1) * nt];
        let smoothed = circular_convolve(chunk, &kernel);
        chunk.copy_from_slice(&smoothed);
    }
    Ok(DistributionField::new(sgrid, agrid.clone(), values, field.time())?)
}

/// ν(ω·Ω̄) P_{ω⊥}Ω̄ for a unit target.
fn alignment_drift(omega: &Vector3<f64>, target: &Vector3<f64>, nu: &FrequencySpec) -> Vector3<f64> {
    let u = omega.dot(target);
    nu.nu(u) * (target - u * omega)
}

fn nearest_bin(coordinate: f64, spacing: f64, n: usize) -> usize {
    ((coordinate / spacing + 0.5).floor() as usize) % n
}

/// Discrete periodic Gaussian, σ = bandwidth · period, normalized to Σ = 1.
fn periodic_gaussian_kernel(n: usize, bandwidth: f64) -> Vec<f64> {
    let sigma_bins = (bandwidth * n as f64).max(1e-12);
    let mut kernel = vec![0.0; n];
    for (d, k) in kernel.iter_mut().enumerate() {
        for image in -4i64..=4 {
            let offset = d as f64 + image as f64 * n as f64;
            *k += (-0.5 * (offset / sigma_bins).powi(2)).exp();
        }
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

fn circular_convolve(line: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = line.len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (d, k) in kernel.iter().enumerate() {
            acc += k * line[(i + n - d % n) % n];
        }
        *o = acc;
    }
    out
}

fn sampling_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SAMPLING_STREAM);
    rng
}

fn sample_positions(
    rng: &mut ChaCha8Rng,
    n: usize,
    torus: &Torus,
) -> Result<Vec<[f64; 2]>, ParticleError> {
    if n == 0 {
        return Err(ParticleError::BadParameter("need at least one particle".into()));
    }
    Ok((0..n)
        .map(|_| {
            let mut x = [0.0, 0.0];
            for (a, coord) in x.iter_mut().enumerate().take(torus.dims()) {
                *coord = uniform(rng) * torus.length_axis(a);
            }
            torus.wrap(x)
        })
        .collect())
}

/// Uniform draw in [0, 1) from the top 53 bits of the stream.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One Box–Muller pair; the log argument 1 − u ∈ (0, 1] never vanishes.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform(rng);
    let u2 = uniform(rng);
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    let phi = 2.0 * PI * u2;
    (r * phi.cos(), r * phi.sin())
}

/// Standard Gaussian vector in the ambient space of the direction sphere.
fn gaussian_vector(rng: &mut ChaCha8Rng, dim: Dim) -> Vector3<f64> {
    let (z0, z1) = gaussian_pair(rng);
    match dim {
        Dim::Two => Vector3::new(z0, z1, 0.0),
        Dim::Three => {
            let (z2, _) = gaussian_pair(rng);
            Vector3::new(z0, z1, z2)
        }
    }
}

/// Uniform unit vector on the direction sphere.
fn random_unit(rng: &mut ChaCha8Rng, dim: Dim) -> Vector3<f64> {
    match dim {
        Dim::Two => {
            let theta = 2.0 * PI * uniform(rng);
            Vector3::new(theta.cos(), theta.sin(), 0.0)
        }
        Dim::Three => {
            let z = 2.0 * uniform(rng) - 1.0;
            let phi = 2.0 * PI * uniform(rng);
            let s = (1.0 - z * z).max(0.0).sqrt();
            Vector3::new(s * phi.cos(), s * phi.sin(), z)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LpOrder;
    use crate::model::Equilibrium;
    use approx::assert_relative_eq;

    fn unit_nu() -> FrequencySpec {
        FrequencySpec::constant(1.0).unwrap()
    }

    fn zero_nu() -> FrequencySpec {
        FrequencySpec::constant(0.0).unwrap()
    }

    fn params(nu: FrequencySpec, mu: f64, dt: f64, radius: f64) -> SimParams {
        SimParams::new(nu, mu, dt, radius).unwrap()
    }

    fn angle_dir(theta: f64) -> Vector3<f64> {
        Vector3::new(theta.cos(), theta.sin(), 0.0)
    }

    #[test]
    fn flux_counts_self_and_neighbors() {
        let torus = Torus::plane(2.0, 2.0).unwrap();
        // single particle: J = own direction
        let solo = ParticleEnsemble::from_parts(
            vec![[0.3, 0.4]],
            vec![angle_dir(1.0)],
            torus,
            Dim::Two,
            1,
        )
        .unwrap();
        assert_relative_eq!(solo.neighbor_flux(0.5, 0), angle_dir(1.0), epsilon = 1e-15);
        // two distant particles: each keeps its own direction
        let pair = ParticleEnsemble::from_parts(
            vec![[0.0, 0.0], [1.0, 1.0]],
            vec![angle_dir(0.0), angle_dir(2.0)],
            torus,
            Dim::Two,
            1,
        )
        .unwrap();
        assert_relative_eq!(pair.neighbor_flux(0.5, 0), angle_dir(0.0), epsilon = 1e-15);
        assert_relative_eq!(pair.neighbor_flux(0.5, 1), angle_dir(2.0), epsilon = 1e-15);
        // three mutual neighbors with directions (1,0), (0,1), (−1,0): J = (0,1)
        let trio = ParticleEnsemble::from_parts(
            vec![[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]],
            vec![
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
                Vector3::new(-1.0, 0.0, 0.0),
            ],
            torus,
            Dim::Two,
            1,
        )
        .unwrap();
        for i in 0..3 {
            assert_relative_eq!(
                trio.neighbor_flux(0.5, i),
                Vector3::new(0.0, 1.0, 0.0),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn windowed_fluxes_match_direct_sum_on_the_line() {
        let torus = Torus::line(1.0).unwrap();
        let ens = ParticleEnsemble::sample_uniform(257, torus, Dim::Two, 42).unwrap();
        for radius in [0.03, 0.2, 0.49, 0.8] {
            let fast = ens.neighbor_fluxes(radius);
            for i in 0..ens.len() {
                let brute = ens.neighbor_flux(radius, i);
                assert!(
                    (fast[i] - brute).norm() < 1e-9,
                    "radius {radius}, particle {i}: {:?} vs {:?}",
                    fast[i],
                    brute
                );
            }
        }
    }

    #[test]
    fn cell_list_fluxes_match_direct_sum_on_the_plane() {
        let torus = Torus::plane(1.0, 0.5).unwrap();
        let ens = ParticleEnsemble::sample_uniform(211, torus, Dim::Two, 7).unwrap();
        for radius in [0.04, 0.13, 0.3, 0.6] {
            let fast = ens.neighbor_fluxes(radius);
            for i in 0..ens.len() {
                let brute = ens.neighbor_flux(radius, i);
                assert!(
                    (fast[i] - brute).norm() < 1e-12,
                    "radius {radius}, particle {i}: {:?} vs {:?}",
                    fast[i],
                    brute
                );
            }
        }
    }

    #[test]
    fn isolated_particle_moves_straight_without_noise() {
        let torus = Torus::plane(4.0, 4.0).unwrap();
        let omega = angle_dir(0.7);
        let mut ens =
            ParticleEnsemble::from_parts(vec![[1.0, 1.0]], vec![omega], torus, Dim::Two, 3)
                .unwrap();
        let p = params(unit_nu(), 0.0, 0.01, 0.2);
        for _ in 0..100 {
            ens.sde_step(&p).unwrap();
        }
        assert_relative_eq!(ens.directions()[0], omega, epsilon = 1e-14);
        assert_relative_eq!(ens.positions()[0][0], 1.0 + omega.x, epsilon = 1e-12);
        assert_relative_eq!(ens.positions()[0][1], 1.0 + omega.y, epsilon = 1e-12);
        assert_relative_eq!(ens.time(), 1.0, epsilon = 1e-12);
    }

    /// Two mutually aligned particles close the angle gap g according to
    /// ġ = −2 sin(g/2), whose exact solution is tan(g/4) = tan(g₀/4)e^{−t}.
    #[test]
    fn two_body_gap_contracts_along_the_oracle() {
        let torus = Torus::plane(2.0, 2.0).unwrap();
        let g0: f64 = 2.5;
        let mut ens = ParticleEnsemble::from_parts(
            vec![[0.5, 0.5], [0.5, 0.5]],
            vec![angle_dir(0.0), angle_dir(g0)],
            torus,
            Dim::Two,
            11,
        )
        .unwrap();
        let dt = 1e-3;
        // radius larger than the domain diameter: always mutual neighbors
        let p = params(unit_nu(), 0.0, dt, 5.0);
        let gap = |e: &ParticleEnsemble| {
            let d = e.directions();
            d[0].dot(&d[1]).clamp(-1.0, 1.0).acos()
        };
        let mut prev = gap(&ens);
        for _ in 0..1000 {
            ens.sde_step(&p).unwrap();
            let g = gap(&ens);
            assert!(g < prev, "gap failed to contract: {g} vs {prev}");
            prev = g;
        }
        let exact = 4.0 * ((g0 / 4.0).tan() * (-1.0f64).exp()).atan();
        assert_relative_eq!(prev, exact, max_relative = 1e-2);
    }

    #[test]
    fn directions_stay_unit_under_noise() {
        let torus = Torus::line(1.0).unwrap();
        let mut ens = ParticleEnsemble::sample_uniform(200, torus, Dim::Two, 5).unwrap();
        let p = params(unit_nu(), 0.3, 1e-3, 0.2);
        for _ in 0..100 {
            ens.sde_step(&p).unwrap();
        }
        for (i, omega) in ens.directions().iter().enumerate() {
            assert!((omega.norm() - 1.0).abs() < 1e-12, "particle {i}: |ω| = {}", omega.norm());
            assert_eq!(omega.z, 0.0, "planar ensemble left the plane");
        }
    }

    #[test]
    fn sphere_directions_stay_unit_under_noise() {
        let torus = Torus::plane(1.0, 1.0).unwrap();
        let mut ens = ParticleEnsemble::sample_uniform(100, torus, Dim::Three, 5).unwrap();
        let p = params(unit_nu(), 0.3, 1e-3, 0.2);
        for _ in 0..50 {
            ens.sde_step(&p).unwrap();
        }
        for omega in ens.directions() {
            assert!((omega.norm() - 1.0).abs() < 1e-12);
        }
    }

    /// Pure angular diffusion relaxes an aligned ensemble to the uniform
    /// law: 16-bin chi-square below the 1% critical value (15 dof) and mean
    /// direction at the N^{−1/2} scale.
    #[test]
    fn pure_noise_relaxes_to_uniform_directions()
    {
        let torus = Torus::line(1.0).unwrap();
        let n = 4000;
        let mut ens =
            ParticleEnsemble::sample_aligned(n, torus, &Direction::from_angle(0.4), 17).unwrap();
        let p = params(zero_nu(), 1.0, 1e-2, 0.2);
        for _ in 0..800 {
            ens.sde_step(&p).unwrap();
        }
        let mut counts = [0usize; 16];
        for omega in ens.directions() {
            let theta = omega.y.atan2(omega.x).rem_euclid(2.0 * PI);
            counts[((theta / (2.0 * PI) * 16.0) as usize).min(15)] += 1;
        }
        let expected = n as f64 / 16.0;
        let chi2: f64 =
            counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 30.578, "chi-square {chi2} exceeds the 1% critical value");
        let mean = ens.order_parameter();
        assert!(mean < 5.0 / (n as f64).sqrt(), "residual alignment {mean}");
    }

    #[test]
    fn trajectories_are_deterministic_in_the_seed() {
        let torus = Torus::line(1.0).unwrap();
        let p = params(unit_nu(), 0.2, 1e-3, 0.25);
        let run = |seed: u64| {
            let mut ens = ParticleEnsemble::sample_uniform(64, torus, Dim::Two, seed).unwrap();
            for _ in 0..10 {
                ens.sde_step(&p).unwrap();
            }
            ens
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(a.positions(), b.positions());
        assert!(a.directions().iter().zip(b.directions()).all(|(x, y)| x == y));
        let c = run(10);
        assert!(a.positions() != c.positions());
    }

    #[test]
    fn empirical_density_of_point_mass_fills_one_bin() {
        let sgrid = SpatialGrid::line(8, 1.0).unwrap();
        let agrid = Arc::new(AngularGrid::circle(16).unwrap());
        let torus = Torus::line(1.0).unwrap();
        let theta = agrid.thetas()[3];
        let ens = ParticleEnsemble::from_parts(
            vec![[sgrid.position(5)[0], 0.0]; 10],
            vec![angle_dir(theta); 10],
            torus,
            Dim::Two,
            2,
        )
        .unwrap();
        let f = ens.empirical_density(sgrid, agrid.clone(), 0.0).unwrap();
        assert_relative_eq!(f.mass(), 1.0, epsilon = 1e-12);
        let expected = 1.0 / (sgrid.cell_volume() * agrid.weights()[3]);
        assert_relative_eq!(f.value(5, 3), expected, epsilon = 1e-9);
        // spatial marginal of the one occupied cell integrates to 1/ΔV
        let rho: f64 =
            (0..16).map(|j| f.value(5, j) * agrid.weights()[j]).sum();
        assert_relative_eq!(rho, 1.0 / sgrid.cell_volume(), epsilon = 1e-9);
    }

    #[test]
    fn empirical_density_of_uniform_ensemble_is_flat_within_sampling_error() {
        let sgrid = SpatialGrid::line(8, 1.0).unwrap();
        let agrid = Arc::new(AngularGrid::circle(16).unwrap());
        let torus = Torus::line(1.0).unwrap();
        let n = 20_000;
        let ens = ParticleEnsemble::sample_uniform(n, torus, Dim::Two, 23).unwrap();
        let f = ens.empirical_density(sgrid, agrid.clone(), 0.0).unwrap();
        assert_relative_eq!(f.mass(), 1.0, epsilon = 1e-12);
        // bin counts are Binomial(N, 1/128): compare against 5 standard errors
        let bins = 128.0;
        let p = 1.0 / bins;
        let std_err = (n as f64 * p * (1.0 - p)).sqrt();
        let uniform_value = 1.0 / (2.0 * PI);
        for cell in 0..8 {
            for j in 0..16 {
                let count =
                    f.value(cell, j) * n as f64 * sgrid.cell_volume() * agrid.weights()[j];
                assert!(
                    (count - n as f64 * p).abs() < 5.0 * std_err,
                    "bin ({cell},{j}): count {count}"
                );
                assert!((f.value(cell, j) - uniform_value).abs() < uniform_value * 0.4);
            }
        }
    }

    #[test]
    fn sampling_from_a_field_reproduces_it() {
        let sgrid = SpatialGrid::line(8, 1.0).unwrap();
        let agrid = Arc::new(AngularGrid::circle(16).unwrap());
        let eq = Equilibrium::new(&unit_nu(), 0.3, Dim::Two).unwrap();
        let target = eq
            .field(sgrid, agrid.clone(), &Direction::from_angle(1.0), |x| {
                1.0 + 0.3 * (2.0 * PI * x[0]).cos()
            }, 0.0)
            .unwrap();
        let n = 50_000;
        let ens = ParticleEnsemble::sample_from_field(&target, n, 31).unwrap();
        assert_eq!(ens.len(), n);
        let f = ens.empirical_density(sgrid, agrid, 0.0).unwrap();
        // the target has mass 1 by construction, so distances are relative
        assert_relative_eq!(target.mass(), 1.0, epsilon = 1e-10);
        let dist = f.lp_distance(&target, LpOrder::Finite(1.0)).unwrap();
        assert!(dist < 0.1, "sampled histogram is off by {dist} in L1");
    }

    #[test]
    fn smoothing_preserves_mass_and_flattens_nothing_uniform() {
        let sgrid = SpatialGrid::line(8, 1.0).unwrap();
        let agrid = Arc::new(AngularGrid::circle(16).unwrap());
        let f = DistributionField::from_fn(sgrid, agrid.clone(), 0.0, |x, d| {
            1.0 + 0.5 * (2.0 * PI * x[0]).cos() * d.angle().cos()
        })
        .unwrap();
        let smoothed = gaussian_smooth(&f, 0.05).unwrap();
        assert_relative_eq!(smoothed.mass(), f.mass(), epsilon = 1e-12);
        // smoothing contracts the oscillation around the mean
        let uniform = DistributionField::from_fn(sgrid, agrid.clone(), 0.0, |_, _| 1.0).unwrap();
        let before = f.lp_distance(&uniform, LpOrder::Finite(2.0)).unwrap();
        let after = smoothed.lp_distance(&uniform, LpOrder::Finite(2.0)).unwrap();
        assert!(after < before, "smoothing failed to contract: {after} vs {before}");
        assert!(after > 0.1 * before, "smoothing is implausibly aggressive");
        // a uniform field is a fixed point
        let fixed = gaussian_smooth(&uniform, 0.1).unwrap();
        let drift = fixed.lp_distance(&uniform, LpOrder::Infinity).unwrap();
        assert!(drift < 1e-12);
    }

    #[test]
    fn alignment_order_parameter_grows_without_noise() {
        let torus = Torus::line(1.0).unwrap();
        let mut ens = ParticleEnsemble::sample_uniform(300, torus, Dim::Two, 77).unwrap();
        // all-to-all coupling; antipodal stragglers need t of a few units
        let p = params(unit_nu(), 0.0, 5e-3, 1.0);
        let mut prev = ens.order_parameter();
        for step in 0..2000 {
            ens.sde_step(&p).unwrap();
            let op = ens.order_parameter();
            assert!(
                op > prev - 1e-7,
                "order parameter dropped at step {step}: {op} vs {prev}"
            );
            prev = op;
        }
        assert!(prev > 0.95, "ensemble failed to align: order parameter {prev}");
    }

    #[test]
    fn parameter_validation_rejects_bad_input() {
        assert!(SimParams::new(unit_nu(), -0.1, 1e-3, 0.2).is_err());
        assert!(SimParams::new(unit_nu(), 0.1, 0.0, 0.2).is_err());
        assert!(SimParams::new(unit_nu(), 0.1, 1e-3, 0.0).is_err());
        assert!(Torus::line(0.0).is_err());
        assert!(Torus::plane(1.0, -1.0).is_err());
        let torus = Torus::line(1.0).unwrap();
        // non-unit direction
        assert!(ParticleEnsemble::from_parts(
            vec![[0.0, 0.0]],
            vec![Vector3::new(2.0, 0.0, 0.0)],
            torus,
            Dim::Two,
            1
        )
        .is_err());
        // circle ensemble with out-of-plane direction
        assert!(ParticleEnsemble::from_parts(
            vec![[0.0, 0.0]],
            vec![Vector3::new(0.0, 0.0, 1.0)],
            torus,
            Dim::Two,
            1
        )
        .is_err());
        // mismatched lengths
        assert!(ParticleEnsemble::from_parts(
            vec![[0.0, 0.0], [0.1, 0.0]],
            vec![Vector3::new(1.0, 0.0, 0.0)],
            torus,
            Dim::Two,
            1
        )
        .is_err());
    }

    #[test]
    fn random_tie_policy_disperses_a_balanced_pair() {
        // two exactly antipodal particles at the same point: J = 0 exactly
        let torus = Torus::plane(1.0, 1.0).unwrap();
        let east = Vector3::new(1.0, 0.0, 0.0);
        let west = Vector3::new(-1.0, 0.0, 0.0);
        let make = || {
            ParticleEnsemble::from_parts(
                vec![[0.5, 0.5], [0.5, 0.5]],
                vec![east, west],
                torus,
                Dim::Two,
                21,
            )
            .unwrap()
        };
        // keep-direction: drift vanishes, directions persist without noise
        let mut keep = make();
        let p = params(unit_nu(), 0.0, 1e-2, 0.3);
        keep.sde_step(&p).unwrap();
        assert_relative_eq!(keep.directions()[0], east, epsilon = 1e-14);
        assert_relative_eq!(keep.directions()[1], west, epsilon = 1e-14);
        // random-direction: the pair picks up drift from the random target
        let mut random = make();
        let p = params(unit_nu(), 0.0, 1e-2, 0.3).with_tie_policy(TiePolicy::RandomDirection);
        random.sde_step(&p).unwrap();
        let moved =
            (random.directions()[0] - east).norm() + (random.directions()[1] - west).norm();
        assert!(moved > 1e-6, "random tie policy produced no drift");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn directions_remain_unit_and_positions_wrapped(
                seed in 0u64..1000,
                mu in 0.0f64..1.0,
                steps in 1usize..8,
            ) {
                let torus = Torus::plane(1.0, 1.0).unwrap();
                let mut ens = ParticleEnsemble::sample_uniform(40, torus, Dim::Two, seed).unwrap();
                let p = params(unit_nu(), mu, 1e-3, 0.2);
                for _ in 0..steps {
                    ens.sde_step(&p).unwrap();
                }
                for omega in ens.directions() {
                    prop_assert!((omega.norm() - 1.0).abs() < 1e-12);
                }
                for x in ens.positions() {
                    prop_assert!((0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]));
                }
            }

            #[test]
            fn line_window_sums_match_brute_force(
                seed in 0u64..500,
                radius in 0.01f64..0.9,
                n in 2usize..120,
            ) {
                let torus = Torus::line(1.0).unwrap();
                let ens = ParticleEnsemble::sample_uniform(n, torus, Dim::Two, seed).unwrap();
                let fast = ens.neighbor_fluxes(radius);
                for i in 0..n {
                    let brute = ens.neighbor_flux(radius, i);
                    prop_assert!((fast[i] - brute).norm() < 1e-9);
                }
            }
        }
    }
}
