//! Expanded coefficients of the alignment force.
//!
//! With a frozen per-cell axis Ω̄ (a director, possibly of norm < 1 after
//! regularization) and u = ω·Ω̄, the force term −∇_ω·(f ν(u) P_{ω⊥}Ω̄)
//! expands into advection by ψ₁ plus reaction by ψ₂ + ψ₃:
//!
//!   ψ₁(ω) = ν(u) P_{ω⊥}Ω̄,
//!   ψ₂(ω) = ν′(u) |P_{ω⊥}Ω̄|²,
//!   ψ₃(ω) = −(d−1) ν(u) u,
//!
//! linked by the divergence identity ∇_ω·ψ₁ = ψ₂ + ψ₃ for any fixed Ω̄.

use super::frequency::FrequencySpec;
use super::ModelError;
use crate::sphere::{AngularGrid, Dim, TangentField};
use nalgebra::Vector3;

/// The three expanded force coefficients sampled on an angular grid.
#[derive(Clone, Debug)]
pub struct ForceCoefficients {
    /// Tangential advection field ψ₁.
    pub psi1: TangentField,
    /// Reaction from the frequency slope, ψ₂ = ν′(u)|P_{ω⊥}Ω̄|².
    pub psi2: Vec<f64>,
    /// Reaction from the sphere curvature, ψ₃ = −(d−1)ν(u)u.
    pub psi3: Vec<f64>,
}

/// Samples (ψ₁, ψ₂, ψ₃) for a frozen axis on an angular grid.
///
/// The axis may have any norm ≤ 1 (regularized directors satisfy |Ω_ε| < 1);
/// larger norms would push ν outside its domain and are rejected.
pub fn force_coefficients(
    axis: &Vector3<f64>,
    nu: &FrequencySpec,
    grid: &AngularGrid,
) -> Result<ForceCoefficients, ModelError> {
    check_axis(axis, grid.dim())?;
    let n = grid.len();
    let d_minus_1 = (grid.dim().ambient() - 1) as f64;
    let mut raw = Vec::with_capacity(n);
    let mut psi2 = Vec::with_capacity(n);
    let mut psi3 = Vec::with_capacity(n);
    let axis_sq = axis.norm_squared();
    for node in grid.nodes() {
        let omega = node.vector();
        let u = omega.dot(axis);
        let tangential = axis - omega * u;
        raw.push(tangential * nu.nu(u));
        psi2.push(nu.nu_prime(u) * (axis_sq - u * u).max(0.0));
        psi3.push(-d_minus_1 * nu.nu(u) * u);
    }
    let psi1 = TangentField::from_ambient(grid, &raw)?;
    Ok(ForceCoefficients { psi1, psi2, psi3 })
}

fn check_axis(axis: &Vector3<f64>, dim: Dim) -> Result<(), ModelError> {
    let n = axis.norm();
    if !n.is_finite() {
        return Err(ModelError::BadParameter("force axis has non-finite components".into()));
    }
    if n > 1.0 + 1e-9 {
        return Err(ModelError::BadParameter(format!(
            "force axis must have norm <= 1 (directors are contractions), got {n}"
        )));
    }
    if dim == Dim::Two && axis.z != 0.0 {
        return Err(ModelError::BadParameter("planar force axis must have zero z component".into()));
    }
    Ok(())
}

/// Circle fast path: fills the angular advection speed a_j = ψ₁·τ_j and the
/// reaction b_j = ψ₂ + ψ₃ for one cell's frozen axis, with no allocation.
pub(crate) fn force_ab_into(
    axis: &Vector3<f64>,
    nu: &FrequencySpec,
    grid: &AngularGrid,
    a: &mut [f64],
    b: &mut [f64],
) {
    debug_assert_eq!(grid.dim(), Dim::Two);
    debug_assert_eq!(a.len(), grid.len());
    debug_assert_eq!(b.len(), grid.len());
    let axis_sq = axis.norm_squared();
    for (j, node) in grid.nodes().iter().enumerate() {
        let omega = node.vector();
        let u = omega.dot(axis);
        // tangent τ = (−sin θ, cos θ): P_{ω⊥}Ω̄·τ = Ω̄·τ
        let tau_dot = -axis.x * omega.y + axis.y * omega.x;
        let nu_u = nu.nu(u);
        a[j] = nu_u * tau_dot;
        b[j] = nu.nu_prime(u) * (axis_sq - u * u).max(0.0) - nu_u * u;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Equilibrium;
    use crate::sphere::{
        angular_divergence, angular_gradient, integrate_sphere, project_tangent, Direction,
    };

    fn affine() -> FrequencySpec {
        FrequencySpec::affine(1.0, 0.3).unwrap()
    }

    #[test]
    fn divergence_identity_on_circle() {
        // spectral ∇_ω·ψ₁ equals ψ₂ + ψ₃ to spectral accuracy
        let grid = AngularGrid::circle(64).unwrap();
        for (nu, axis) in [
            (FrequencySpec::constant(1.0).unwrap(), Vector3::new(1.0, 0.0, 0.0)),
            (affine(), Vector3::new(0.6, -0.35, 0.0)),
            (affine(), Vector3::new(-0.3, 0.94, 0.0)),
        ] {
            let fc = force_coefficients(&axis, &nu, &grid).unwrap();
            let div = angular_divergence(&grid, &fc.psi1).unwrap();
            for j in 0..grid.len() {
                let rhs = fc.psi2[j] + fc.psi3[j];
                assert!((div[j] - rhs).abs() < 1e-10, "node {j}: {} vs {rhs}", div[j]);
            }
        }
    }

    #[test]
    fn divergence_identity_weak_form_on_sphere() {
        // for the affine law the weak identity ∫ ∇φ·ψ₁ + ∫ φ(ψ₂+ψ₃) = 0 with
        // φ = ω·v has a polynomial integrand, exact under the product rule
        let grid = AngularGrid::sphere_gauss(32, 64).unwrap();
        let axis = Vector3::new(0.4, -0.2, 0.5);
        let v = Vector3::new(0.3, 1.1, -0.7);
        let fc = force_coefficients(&axis, &affine(), &grid).unwrap();
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for (j, node) in grid.nodes().iter().enumerate() {
            let w = grid.weights()[j];
            let grad_phi = project_tangent(node, v);
            lhs += w * grad_phi.dot(&fc.psi1.value(j));
            rhs += w * node.vector().dot(&v) * (fc.psi2[j] + fc.psi3[j]);
        }
        assert!((lhs + rhs).abs() < 1e-12, "weak identity residual {}", lhs + rhs);
    }

    #[test]
    fn fast_path_matches_coefficients() {
        let grid = AngularGrid::circle(32).unwrap();
        let axis = Vector3::new(0.5, -0.62, 0.0);
        let nu = affine();
        let fc = force_coefficients(&axis, &nu, &grid).unwrap();
        let mut a = vec![0.0; 32];
        let mut b = vec![0.0; 32];
        force_ab_into(&axis, &nu, &grid, &mut a, &mut b);
        for j in 0..32 {
            let tau = grid.tangent(j);
            assert!((a[j] - fc.psi1.value(j).dot(&tau)).abs() < 1e-14);
            assert!((b[j] - (fc.psi2[j] + fc.psi3[j])).abs() < 1e-14);
        }
    }

    #[test]
    fn von_mises_balances_force_and_diffusion() {
        // μ ∇_ω M_A = M_A ψ₁ pointwise, for a non-unit frozen axis A
        let grid = AngularGrid::circle(64).unwrap();
        let mu = 0.2;
        let nu = affine();
        let axis = Vector3::new(0.56, 0.42, 0.0); // |A| = 0.7
        let m: Vec<f64> =
            grid.nodes().iter().map(|n| ((nu.sigma(n.dot(&axis))) / mu).exp()).collect();
        let grad = angular_gradient(&grid, &m).unwrap();
        let fc = force_coefficients(&axis, &nu, &grid).unwrap();
        let scale = m.iter().fold(0.0f64, |s, &v| s.max(v));
        for j in 0..grid.len() {
            let residual = (grad.value(j) * mu - fc.psi1.value(j) * m[j]).norm();
            assert!(residual < 1e-9 * scale, "node {j}: {residual:e}");
        }
    }

    #[test]
    fn equilibrium_annihilates_weak_operator() {
        // ∫ [μ ∇φ·∇M + ∇φ·(M ψ₁)] dω = 0 for every smooth φ when M is the
        // von Mises profile of a unit axis: test with φ = ω·v on the circle
        let grid = AngularGrid::circle(64).unwrap();
        let mu = 0.25;
        let nu = affine();
        let dir = Direction::from_angle(0.9);
        let axis = dir.vector();
        let eq = Equilibrium::new(&nu, mu, Dim::Two).unwrap();
        let m: Vec<f64> = grid.nodes().iter().map(|n| eq.density(n.dot(&axis))).collect();
        let grad_m = angular_gradient(&grid, &m).unwrap();
        let fc = force_coefficients(&axis, &nu, &grid).unwrap();
        let v = Vector3::new(-0.8, 0.35, 0.0);
        let mut total = 0.0;
        for (j, node) in grid.nodes().iter().enumerate() {
            let w = grid.weights()[j];
            let grad_phi = project_tangent(node, v);
            total -= w * grad_phi.dot(&(grad_m.value(j) * mu - fc.psi1.value(j) * m[j]));
        }
        assert!(total.abs() < 1e-12, "weak residual {total:e}");
        // sanity: M integrates to 1 on this grid
        assert!((integrate_sphere(&grid, &m).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn axis_validation() {
        let grid = AngularGrid::circle(16).unwrap();
        let nu = affine();
        assert!(force_coefficients(&Vector3::new(1.2, 0.0, 0.0), &nu, &grid).is_err());
        assert!(force_coefficients(&Vector3::new(f64::NAN, 0.0, 0.0), &nu, &grid).is_err());
        assert!(force_coefficients(&Vector3::new(0.1, 0.0, 0.5), &nu, &grid).is_err());
        assert!(force_coefficients(&Vector3::zeros(), &nu, &grid).is_ok());
    }
}
