//! Phase-space fields f(x, ω) on the periodic torus × sphere product grid.
//!
//! The torus grid is uniform per axis with nodes x_i = i·Δx; the angular
//! factor is any [`AngularGrid`]. Values are
//! stored cell-major: `values[cell * n_theta + j]` with `cell = ix * ny + iy`,
//! so each spatial cell's angular slice is contiguous.

use crate::sphere::{angular_gradient, AngularGrid, Dim, Direction, SphereError};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("spatial grid: {0}")]
    BadGrid(String),
    #[error("value count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("negative density beyond roundoff tolerance: min {min:e} vs -1e-10*linf {allowed:e}")]
    NegativeDensity { min: f64, allowed: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("L^p order must satisfy p >= 1, got {p}")]
    BadNormOrder { p: f64 },
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// Uniform periodic grid on the torus 𝕋^{d_x}, d_x ∈ {1, 2}.
///
/// Axis node counts are powers of two (transform efficiency). For d_x = 1 the
/// second axis degenerates to a single cell of unit length so that volume
/// formulas are dimension-uniform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    dims: usize,
    n: [usize; 2],
    length: [f64; 2],
}

impl SpatialGrid {
    pub fn line(n: usize, length: f64) -> Result<Self, FieldError> {
        Self::check_axis(n, length)?;
        Ok(SpatialGrid { dims: 1, n: [n, 1], length: [length, 1.0] })
    }

    pub fn plane(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, FieldError> {
        Self::check_axis(nx, lx)?;
        Self::check_axis(ny, ly)?;
        Ok(SpatialGrid { dims: 2, n: [nx, ny], length: [lx, ly] })
    }

    fn check_axis(n: usize, length: f64) -> Result<(), FieldError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(FieldError::BadGrid(format!("axis cell count must be a power of two, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(FieldError::BadGrid(format!("axis length must be positive, got {length}")));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Cells along axis `a` (1 for the degenerate axis of a 1-d grid).
    pub fn n_axis(&self, a: usize) -> usize {
        self.n[a]
    }

    pub fn length_axis(&self, a: usize) -> f64 {
        self.length[a]
    }

    pub fn dx(&self, a: usize) -> f64 {
        self.length[a] / self.n[a] as f64
    }

    pub fn n_cells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx(0) * self.dx(1)
    }

    pub fn total_volume(&self) -> f64 {
        self.length[0] * self.length[1]
    }

    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        ix * self.n[1] + iy
    }

    /// Node position of a cell (second component 0 for 1-d grids... the
    /// degenerate axis always yields coordinate 0).
    pub fn position(&self, cell: usize) -> [f64; 2] {
        let ix = cell / self.n[1];
        let iy = cell % self.n[1];
        [ix as f64 * self.dx(0), if self.dims == 2 { iy as f64 * self.dx(1) } else { 0.0 }]
    }

    /// Wraps a point onto the fundamental domain [0, L) per axis.
    pub fn wrap(&self, x: [f64; 2]) -> [f64; 2] {
        let mut out = x;
        for a in 0..self.dims {
            out[a] = x[a].rem_euclid(self.length[a]);
            if out[a] == self.length[a] {
                out[a] = 0.0;
            }
        }
        out
    }
}

/// Distribution f(x, ω, t) sampled on a torus × sphere grid.
///
/// Nonnegative up to roundoff (min f ≥ −1e-10 ‖f‖∞, checked at construction)
/// with total mass recorded at construction.
#[derive(Clone, Debug)]
pub struct DistributionField {
    values: Vec<f64>,
    time: f64,
    sgrid: SpatialGrid,
    agrid: Arc<AngularGrid>,
    mass: f64,
}

impl DistributionField {
    pub fn new(
        sgrid: SpatialGrid,
        agrid: Arc<AngularGrid>,
        values: Vec<f64>,
        time: f64,
    ) -> Result<Self, FieldError> {
        let expected = sgrid.n_cells() * agrid.len();
        if values.len() != expected {
            return Err(FieldError::LengthMismatch { expected, got: values.len() });
        }
        let mut linf = 0.0f64;
        let mut min = f64::INFINITY;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(FieldError::NonFinite { index: i });
            }
            linf = linf.max(v.abs());
            min = min.min(v);
        }
        let allowed = -1e-10 * linf;
        if min < allowed {
            return Err(FieldError::NegativeDensity { min, allowed });
        }
        let mut field = DistributionField { values, time, sgrid, agrid, mass: 0.0 };
        field.mass = field.integrate();
        Ok(field)
    }

    /// Builds a field by evaluating `f(position, direction)` at every node.
    pub fn from_fn(
        sgrid: SpatialGrid,
        agrid: Arc<AngularGrid>,
        time: f64,
        f: impl Fn([f64; 2], &Direction) -> f64,
    ) -> Result<Self, FieldError> {
        let nt = agrid.len();
        let mut values = Vec::with_capacity(sgrid.n_cells() * nt);
        for cell in 0..sgrid.n_cells() {
            let x = sgrid.position(cell);
            for node in agrid.nodes() {
                values.push(f(x, node));
            }
        }
        Self::new(sgrid, agrid, values, time)
    }

    /// Wraps raw values without the finiteness/positivity validation. The
    /// stepping loop owns those invariants (it checks them at its own
    /// cadence and re-validates the final state through [`Self::new`]).
    pub(crate) fn from_raw_unchecked(
        sgrid: SpatialGrid,
        agrid: Arc<AngularGrid>,
        values: Vec<f64>,
        time: f64,
    ) -> Self {
        let mut field = DistributionField { values, time, sgrid, agrid, mass: 0.0 };
        field.mass = field.integrate();
        field
    }

    pub fn spatial_grid(&self) -> &SpatialGrid {
        &self.sgrid
    }

    pub fn angular_grid(&self) -> &Arc<AngularGrid> {
        &self.agrid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Total mass ∫∫ f dx dω as recorded at construction.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_theta(&self) -> usize {
        self.agrid.len()
    }

    /// Angular slice of one spatial cell.
    pub fn cell_values(&self, cell: usize) -> &[f64] {
        let nt = self.agrid.len();
        &self.values[cell * nt..(cell + 1) * nt]
    }

    pub fn value(&self, cell: usize, j: usize) -> f64 {
        self.values[cell * self.agrid.len() + j]
    }

    fn integrate(&self) -> f64 {
        let vol = self.sgrid.cell_volume();
        let w = self.agrid.weights();
        let nt = w.len();
        let mut total = 0.0;
        for cell in 0..self.sgrid.n_cells() {
            let slice = &self.values[cell * nt..(cell + 1) * nt];
            let cell_sum: f64 = slice.iter().zip(w).map(|(f, w)| f * w).sum();
            total += cell_sum;
        }
        total * vol
    }

    /// Recomputes the mass from current values (equals `mass()` for a freshly
    /// constructed field; used to measure conservation drift).
    pub fn current_mass(&self) -> f64 {
        self.integrate()
    }

    pub fn same_grids(&self, other: &DistributionField) -> bool {
        self.sgrid == other.sgrid
            && self.agrid.dim() == other.agrid.dim()
            && self.agrid.len() == other.agrid.len()
            && self.agrid.weights() == other.agrid.weights()
    }

    /// Phase-space L^p norm with quadrature weights; `None` order means L^∞.
    pub fn lp_norm(&self, p: LpOrder) -> Result<f64, FieldError> {
        match p {
            LpOrder::Infinity => Ok(self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))),
            LpOrder::Finite(p) => {
                if !(p >= 1.0) {
                    return Err(FieldError::BadNormOrder { p });
                }
                let vol = self.sgrid.cell_volume();
                let w = self.agrid.weights();
                let nt = w.len();
                let mut total = 0.0;
                for cell in 0..self.sgrid.n_cells() {
                    let slice = &self.values[cell * nt..(cell + 1) * nt];
                    total += slice
                        .iter()
                        .zip(w)
                        .map(|(f, w)| f.abs().powf(p) * w)
                        .sum::<f64>();
                }
                Ok((total * vol).powf(1.0 / p))
            }
        }
    }

    /// L^p distance ‖self − other‖_p on matching grids.
    pub fn lp_distance(&self, other: &DistributionField, p: LpOrder) -> Result<f64, FieldError> {
        if !self.same_grids(other) {
            return Err(FieldError::GridMismatch);
        }
        match p {
            LpOrder::Infinity => Ok(self
                .values
                .iter()
                .zip(&other.values)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))),
            LpOrder::Finite(p) => {
                if !(p >= 1.0) {
                    return Err(FieldError::BadNormOrder { p });
                }
                let vol = self.sgrid.cell_volume();
                let w = self.agrid.weights();
                let nt = w.len();
                let mut total = 0.0;
                for cell in 0..self.sgrid.n_cells() {
                    let a = &self.values[cell * nt..(cell + 1) * nt];
                    let b = &other.values[cell * nt..(cell + 1) * nt];
                    total += a
                        .iter()
                        .zip(b)
                        .zip(w)
                        .map(|((x, y), w)| (x - y).abs().powf(p) * w)
                        .sum::<f64>();
                }
                Ok((total * vol).powf(1.0 / p))
            }
        }
    }

    /// Angular-gradient energy ∫∫ |∇_ω f^{p/2}|² dx dω (d = 2 grids).
    ///
    /// Roundoff-negative values are clamped to zero before the fractional
    /// power (f ≥ 0 up to roundoff by the construction invariant).
    pub fn angular_energy(&self, p: f64) -> Result<f64, FieldError> {
        if !(p >= 1.0) {
            return Err(FieldError::BadNormOrder { p });
        }
        if self.agrid.dim() != Dim::Two {
            return Err(SphereError::CircleOnly { op: "angular_energy" }.into());
        }
        let vol = self.sgrid.cell_volume();
        let w = self.agrid.weights();
        let nt = w.len();
        let half_p = 0.5 * p;
        let mut total = 0.0;
        let mut g = vec![0.0; nt];
        for cell in 0..self.sgrid.n_cells() {
            let slice = &self.values[cell * nt..(cell + 1) * nt];
            for (gv, &fv) in g.iter_mut().zip(slice) {
                let f = fv.max(0.0);
                *gv = if p == 2.0 { f } else { f.powf(half_p) };
            }
            let grad = angular_gradient(&self.agrid, &g)?;
            total += grad
                .values()
                .iter()
                .zip(w)
                .map(|(v, w)| v.norm_squared() * w)
                .sum::<f64>();
        }
        Ok(total * vol)
    }

    /// Minimum nodal value (diagnostic for the positivity invariant).
    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Norm order for [`DistributionField::lp_norm`]: finite p ≥ 1 or ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpOrder {
    Finite(f64),
    Infinity,
}

impl LpOrder {
    pub fn parse(s: &str) -> Option<LpOrder> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Some(LpOrder::Infinity);
        }
        t.parse::<f64>().ok().filter(|p| *p >= 1.0).map(LpOrder::Finite)
    }
}

impl std::fmt::Display for LpOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpOrder::Finite(p) => write!(f, "{p}"),
            LpOrder::Infinity => write!(f, "inf"),
        }
    }
}
