//! Projection algebra on S^{d−1} and discrete angular calculus.
//!
//! The alignment force lives in the tangent plane of the sphere: with
//! P_{ω⊥} = Id − ω⊗ω the identities
//!
//! * P_{ω⊥}ω = 0 and P_{ω⊥}u·v = P_{ω⊥}v·u,
//! * ∇_ω(ω·v) = P_{ω⊥}v,
//! * ∇_ω·(P_{ω⊥}v) = −(d−1) ω·v,
//! * ∫ f ∇_ω·F dω = −∫ F·(∇_ω f − 2ωf) dω,
//!
//! hold exactly in the continuum. The discrete operators here reproduce them
//! to near machine precision on the circle (d = 2) by Fourier spectral
//! differentiation. For d = 3 the module provides quadrature grids only
//! (Gauss–Legendre in u = cos θ, uniform in azimuth); the differential
//! operators are circle-only by design.

use crate::fourier::Spectral;
use nalgebra::Vector3;
use std::f64::consts::PI;
use thiserror::Error;

/// Sphere dimension d of S^{d−1}: the circle (d = 2) or the 2-sphere (d = 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    /// Ambient dimension d.
    pub fn ambient(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Surface measure |S^{d−1}|: 2π for the circle, 4π for the sphere.
    pub fn sphere_measure(self) -> f64 {
        match self {
            Dim::Two => 2.0 * PI,
            Dim::Three => 4.0 * PI,
        }
    }
}

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("vector norm {norm} is not 1 within 1e-12")]
    NotUnit { norm: f64 },
    #[error("direction for d=2 must lie in the plane (|z| = {z})")]
    NotPlanar { z: f64 },
    #[error("operation `{op}` requires a d=2 (circle) grid")]
    CircleOnly { op: &'static str },
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },
    #[error("grid construction: {0}")]
    BadGrid(String),
}

/// Unit vector on S^{d−1}, stored in ambient ℝ³ (z = 0 when d = 2).
///
/// Unit norm within 1e-12 is enforced at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    v: Vector3<f64>,
    dim: Dim,
}

impl Direction {
    /// Validates |v| = 1 within 1e-12 (and planarity for d = 2).
    pub fn new(v: Vector3<f64>, dim: Dim) -> Result<Self, SphereError> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(SphereError::NotUnit { norm });
        }
        if dim == Dim::Two {
            if v.z.abs() > 1e-12 {
                return Err(SphereError::NotPlanar { z: v.z });
            }
            return Ok(Direction { v: Vector3::new(v.x, v.y, 0.0), dim });
        }
        Ok(Direction { v, dim })
    }

    /// Circle direction (cos θ, sin θ).
    pub fn from_angle(theta: f64) -> Self {
        Direction { v: Vector3::new(theta.cos(), theta.sin(), 0.0), dim: Dim::Two }
    }

    /// Sphere direction from u = cos(polar angle) and azimuth φ.
    pub fn from_cos_azimuth(u: f64, phi: f64) -> Self {
        let s = (1.0 - u * u).max(0.0).sqrt();
        Direction { v: Vector3::new(s * phi.cos(), s * phi.sin(), u), dim: Dim::Three }
    }

    /// Normalizes an arbitrary nonzero vector; `None` for (near-)zero input.
    pub fn normalize_from(v: Vector3<f64>, dim: Dim) -> Option<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return None;
        }
        let mut u = v / norm;
        if dim == Dim::Two {
            u.z = 0.0;
        }
        Some(Direction { v: u, dim })
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.v
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn dot(&self, v: &Vector3<f64>) -> f64 {
        self.v.dot(v)
    }

    /// Angle on the circle (d = 2), in [0, 2π).
    pub fn angle(&self) -> f64 {
        let a = self.v.y.atan2(self.v.x);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}

/// P_{ω⊥} v = v − (ω·v) ω: projection onto the tangent plane at ω.
pub fn project_tangent(omega: &Direction, v: Vector3<f64>) -> Vector3<f64> {
    project_raw(&omega.v, v)
}

/// Projection for a raw unit vector (hot-path variant without the type guard).
#[inline]
pub(crate) fn project_raw(omega: &Vector3<f64>, v: Vector3<f64>) -> Vector3<f64> {
    v - omega * omega.dot(&v)
}

/// Quadrature grid on S^{d−1}.
///
/// d = 2: uniform nodes θ_j = 2πj/N with weights 2π/N — the trapezoid rule,
/// spectrally accurate for periodic integrands — plus cached FFT plans for
/// the spectral differential operators.
///
/// d = 3: tensor product of Gauss–Legendre in u = cos θ and a uniform azimuth
/// grid; quadrature only.
#[derive(Clone, Debug)]
pub struct AngularGrid {
    dim: Dim,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    thetas: Vec<f64>,
    spectral: Option<Spectral>,
}

impl AngularGrid {
    /// Uniform circle grid with `n` nodes (n even, ≥ 8).
    pub fn circle(n: usize) -> Result<Self, SphereError> {
        if n < 8 || n % 2 != 0 {
            return Err(SphereError::BadGrid(format!(
                "circle grid needs an even node count >= 8, got {n}"
            )));
        }
        let thetas: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let nodes = thetas.iter().map(|&t| Direction::from_angle(t)).collect();
        let weights = vec![2.0 * PI / n as f64; n];
        Ok(AngularGrid {
            dim: Dim::Two,
            nodes,
            weights,
            thetas,
            spectral: Some(Spectral::new(n, 2.0 * PI)),
        })
    }

    /// Gauss–Legendre × uniform-azimuth grid on S² with n_polar × n_azimuth
    /// nodes; weights sum to 4π.
    pub fn sphere_gauss(n_polar: usize, n_azimuth: usize) -> Result<Self, SphereError> {
        if n_polar < 2 || n_azimuth < 4 {
            return Err(SphereError::BadGrid(format!(
                "sphere grid needs n_polar >= 2 and n_azimuth >= 4, got {n_polar}x{n_azimuth}"
            )));
        }
        let (us, wus) = crate::quadrature::gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (u, wu) in us.iter().zip(&wus) {
            for jp in 0..n_azimuth {
                let phi = dphi * jp as f64;
                nodes.push(Direction::from_cos_azimuth(*u, phi));
                weights.push(wu * dphi);
            }
        }
        Ok(AngularGrid { dim: Dim::Three, nodes, weights, thetas: Vec::new(), spectral: None })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &Direction {
        &self.nodes[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node angles (d = 2 only; empty for d = 3).
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Unit tangent τ(θ_j) = (−sin θ_j, cos θ_j) at circle node j.
    pub fn tangent(&self, j: usize) -> Vector3<f64> {
        let v = self.nodes[j].vector();
        Vector3::new(-v.y, v.x, 0.0)
    }

    pub(crate) fn spectral(&self) -> Result<&Spectral, SphereError> {
        self.spectral.as_ref().ok_or(SphereError::CircleOnly { op: "spectral differentiation" })
    }

    fn check_len(&self, len: usize) -> Result<(), SphereError> {
        if len != self.len() {
            return Err(SphereError::LengthMismatch { expected: self.len(), got: len });
        }
        Ok(())
    }
}

/// Tangent vector field on an angular grid: one ambient vector per node,
/// projected onto the tangent plane at construction so that value·node = 0.
#[derive(Clone, Debug)]
pub struct TangentField {
    values: Vec<Vector3<f64>>,
}

impl TangentField {
    /// Projects raw ambient vectors node-wise onto the tangent planes.
    pub fn from_ambient(grid: &AngularGrid, raw: &[Vector3<f64>]) -> Result<Self, SphereError> {
        grid.check_len(raw.len())?;
        let mut values = Vec::with_capacity(raw.len());
        for (j, (v, node)) in raw.iter().zip(grid.nodes()).enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(SphereError::NonFinite { index: j });
            }
            values.push(project_raw(&node.vector(), *v));
        }
        Ok(TangentField { values })
    }

    pub fn values(&self) -> &[Vector3<f64>] {
        &self.values
    }

    pub fn value(&self, j: usize) -> Vector3<f64> {
        self.values[j]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Σ_j w_j f_j — the quadrature realization of ∫_{S^{d−1}} f dω.
pub fn integrate_sphere(grid: &AngularGrid, values: &[f64]) -> Result<f64, SphereError> {
    grid.check_len(values.len())?;
    Ok(values.iter().zip(grid.weights()).map(|(f, w)| f * w).sum())
}

/// Angular gradient ∇_ω f = (∂_θ f) τ(θ) on the circle, computed spectrally.
pub fn angular_gradient(grid: &AngularGrid, values: &[f64]) -> Result<TangentField, SphereError> {
    grid.check_len(values.len())?;
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(SphereError::NonFinite { index: j });
    }
    let sp = grid.spectral()?;
    let df = sp.derivative(values);
    let values = df
        .iter()
        .enumerate()
        .map(|(j, &d)| grid.tangent(j) * d)
        .collect();
    Ok(TangentField { values })
}

/// Angular divergence of a tangent field on the circle: ∇_ω·F = ∂_θ (F·τ).
pub fn angular_divergence(grid: &AngularGrid, field: &TangentField) -> Result<Vec<f64>, SphereError> {
    grid.check_len(field.len())?;
    let sp = grid.spectral()?;
    let g: Vec<f64> = (0..grid.len()).map(|j| field.value(j).dot(&grid.tangent(j))).collect();
    Ok(sp.derivative(&g))
}

/// Laplace–Beltrami operator on the circle: spectral ∂_θθ.
pub fn laplace_beltrami(grid: &AngularGrid, values: &[f64]) -> Result<Vec<f64>, SphereError> {
    grid.check_len(values.len())?;
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(SphereError::NonFinite { index: j });
    }
    let sp = grid.spectral()?;
    Ok(sp.second_derivative(values))
}
