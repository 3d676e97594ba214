//! Von Mises equilibria M_Ω(ω) ∝ exp(σ(ω·Ω)/μ) and the concentration map
//! c(μ) = ∫ (ω·Ω) M_Ω dω.

use super::frequency::FrequencySpec;
use super::ModelError;
use crate::field::{DistributionField, FieldError, SpatialGrid};
use crate::quadrature::{circle_exp_moments, exp_moments};
use crate::sphere::{AngularGrid, Dim, Direction};
use std::f64::consts::PI;
use std::sync::Arc;

/// Order parameter c(μ) of the von Mises equilibrium: the mean alignment
/// cosine ∫ (ω·Ω) M_Ω dω, independent of the director Ω.
///
/// Computed with panels graded into the concentration zone, so it stays
/// accurate across the whole range from μ → 0 (c → 1) to μ → ∞ (c → 0).
pub fn c_of_mu(nu: &FrequencySpec, mu: f64, dim: Dim) -> Result<f64, ModelError> {
    check_mu(mu)?;
    let sigma = |u: f64| nu.sigma(u);
    let m = match dim {
        Dim::Three => exp_moments(&sigma, mu),
        Dim::Two => circle_exp_moments(&sigma, nu.nu(1.0), mu),
    };
    Ok(m.first_moment_shifted / m.z_shifted)
}

fn check_mu(mu: f64) -> Result<(), ModelError> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(ModelError::BadParameter(format!("diffusion mu must be finite and > 0, got {mu}")))
    }
}

/// A normalized von Mises equilibrium: M(ω) = e^{σ(ω·Ω)/μ} / Z with
/// ∫ M dω = 1 over the velocity sphere.
///
/// All evaluation goes through the shifted exponent σ(u) − σ(1) ≤ 0, so the
/// profile never overflows even deep in the concentrated regime.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    nu: FrequencySpec,
    mu: f64,
    dim: Dim,
    sigma_one: f64,
    /// Shifted partition function ∫ e^{(σ(ω·Ω)−σ(1))/μ} dω over the sphere.
    z_shifted: f64,
    c: f64,
}

impl Equilibrium {
    pub fn new(nu: &FrequencySpec, mu: f64, dim: Dim) -> Result<Self, ModelError> {
        check_mu(mu)?;
        let sigma = |u: f64| nu.sigma(u);
        let (z_shifted, c) = match dim {
            Dim::Three => {
                let m = exp_moments(&sigma, mu);
                (2.0 * PI * m.z_shifted, m.first_moment_shifted / m.z_shifted)
            }
            Dim::Two => {
                let m = circle_exp_moments(&sigma, nu.nu(1.0), mu);
                (m.z_shifted, m.first_moment_shifted / m.z_shifted)
            }
        };
        Ok(Equilibrium { nu: nu.clone(), mu, dim, sigma_one: nu.sigma(1.0), z_shifted, c })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// c(μ) for this equilibrium (equals [`c_of_mu`]).
    pub fn order_parameter(&self) -> f64 {
        self.c
    }

    /// M as a function of the alignment cosine u = ω·Ω.
    pub fn density(&self, u: f64) -> f64 {
        ((self.nu.sigma(u) - self.sigma_one) / self.mu).exp() / self.z_shifted
    }

    /// Samples ρ(x)·M_Ω(ω) on a product grid: the equilibrium profile with a
    /// prescribed director and spatial density modulation.
    pub fn field(
        &self,
        sgrid: SpatialGrid,
        agrid: Arc<AngularGrid>,
        director: &Direction,
        rho: impl Fn([f64; 2]) -> f64,
        time: f64,
    ) -> Result<DistributionField, FieldError> {
        assert_eq!(agrid.dim(), self.dim, "equilibrium and grid dimension differ");
        assert_eq!(director.dim(), self.dim, "director dimension differs");
        let axis = director.vector();
        DistributionField::from_fn(sgrid, agrid, time, |x, omega| {
            rho(x) * self.density(omega.dot(&axis))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{director_eps, flux_j, KernelOnGrid};
    use crate::quadrature::bessel_i;
    use crate::sphere::integrate_sphere;

    fn unit_const() -> FrequencySpec {
        FrequencySpec::constant(1.0).unwrap()
    }

    #[test]
    fn c_matches_langevin_closed_form_in_3d() {
        // for unit constant frequency: c(μ) = coth(1/μ) − μ
        for &mu in &[0.1, 0.2, 0.5, 1.0, 2.0, 10.0] {
            let c = c_of_mu(&unit_const(), mu, Dim::Three).unwrap();
            let exact = 1.0 / (1.0 / mu).tanh() - mu;
            assert!((c - exact).abs() < 1e-12, "mu={mu}: {c} vs {exact}");
        }
    }

    #[test]
    fn c_limits_in_3d() {
        let c_small = c_of_mu(&unit_const(), 1e-3, Dim::Three).unwrap();
        assert!(c_small > 0.998, "{c_small}");
        let c_large = c_of_mu(&unit_const(), 1e3, Dim::Three).unwrap();
        assert!(c_large < 0.002 && c_large > 0.0, "{c_large}");
    }

    #[test]
    fn c_matches_bessel_ratio_in_2d() {
        for &mu in &[0.1, 0.2, 0.5, 1.0] {
            let c = c_of_mu(&unit_const(), mu, Dim::Two).unwrap();
            let exact = bessel_i(1, 1.0 / mu) / bessel_i(0, 1.0 / mu);
            assert!((c - exact).abs() < 1e-12, "mu={mu}");
        }
    }

    #[test]
    fn c_is_monotone_decreasing_in_mu() {
        for dim in [Dim::Two, Dim::Three] {
            let mut prev = 1.0;
            for &mu in &[1e-3, 1e-2, 0.1, 0.5, 1.0, 5.0, 50.0] {
                let c = c_of_mu(&unit_const(), mu, dim).unwrap();
                assert!(c < prev && c > 0.0, "{dim:?} mu={mu}");
                prev = c;
            }
        }
    }

    #[test]
    fn zero_frequency_gives_zero_order_parameter() {
        let nu = FrequencySpec::constant(0.0).unwrap();
        assert!(c_of_mu(&nu, 0.7, Dim::Two).unwrap().abs() < 1e-15);
        assert!(c_of_mu(&nu, 0.7, Dim::Three).unwrap().abs() < 1e-15);
    }

    #[test]
    fn tabulated_affine_matches_affine_family() {
        let exact = FrequencySpec::affine(1.0, 0.5).unwrap();
        let knots: Vec<f64> = (0..=10).map(|i| -1.0 + 0.2 * i as f64).collect();
        let values: Vec<f64> = knots.iter().map(|&u| exact.nu(u)).collect();
        let tab = FrequencySpec::tabulated(knots, values).unwrap();
        for &mu in &[0.2, 1.0] {
            for dim in [Dim::Two, Dim::Three] {
                let ca = c_of_mu(&exact, mu, dim).unwrap();
                let ct = c_of_mu(&tab, mu, dim).unwrap();
                assert!((ca - ct).abs() < 1e-12, "{dim:?} mu={mu}: {ca} vs {ct}");
            }
        }
    }

    #[test]
    fn equilibrium_normalizes_on_circle_grid() {
        let grid = AngularGrid::circle(64).unwrap();
        let eq = Equilibrium::new(&unit_const(), 0.2, Dim::Two).unwrap();
        let omega = Direction::from_angle(0.7);
        let values: Vec<f64> =
            grid.nodes().iter().map(|n| eq.density(n.dot(&omega.vector()))).collect();
        let total = integrate_sphere(&grid, &values).unwrap();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        assert!(values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn equilibrium_normalizes_on_sphere_grid() {
        let grid = AngularGrid::sphere_gauss(64, 128).unwrap();
        let eq = Equilibrium::new(&unit_const(), 0.2, Dim::Three).unwrap();
        let omega = Direction::from_cos_azimuth(0.3, 1.1);
        let values: Vec<f64> =
            grid.nodes().iter().map(|n| eq.density(n.dot(&omega.vector()))).collect();
        let total = integrate_sphere(&grid, &values).unwrap();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn equilibrium_flux_consistency_2d() {
        // flux of ρ·M_Ω must be ρ·c(μ)·Ω cell by cell
        let sg = SpatialGrid::line(8, 1.0).unwrap();
        let ag = Arc::new(AngularGrid::circle(64).unwrap());
        let mu = 0.2;
        let rho = 2.0;
        let eq = Equilibrium::new(&unit_const(), mu, Dim::Two).unwrap();
        let omega = Direction::from_angle(1.234);
        let f = eq.field(sg, ag, &omega, |_| rho, 0.0).unwrap();
        let m = director_eps(flux_j(&f, &KernelOnGrid::Identity).unwrap(), 0.0).unwrap();
        let c = eq.order_parameter();
        for cell in 0..8 {
            let j = m.flux(cell);
            assert!((j.norm() - rho * c).abs() < 1e-10, "cell {cell}: |J| = {}", j.norm());
            assert!((m.director(cell) - omega.vector()).norm() < 1e-10);
        }
        // and the recorded mass is ρ·|𝕋| since M is normalized
        assert!((f.mass() - rho).abs() < 1e-10);
    }

    #[test]
    fn equilibrium_flux_consistency_3d() {
        let sg = SpatialGrid::line(2, 1.0).unwrap();
        let ag = Arc::new(AngularGrid::sphere_gauss(64, 128).unwrap());
        let mu = 0.5;
        let eq = Equilibrium::new(&unit_const(), mu, Dim::Three).unwrap();
        let omega = Direction::from_cos_azimuth(-0.2, 0.4);
        let f = eq.field(sg, ag, &omega, |_| 1.0, 0.0).unwrap();
        let m = flux_j(&f, &KernelOnGrid::Identity).unwrap();
        let c = eq.order_parameter();
        for cell in 0..2 {
            let j = m.flux(cell);
            assert!((j.norm() - c).abs() < 1e-6, "cell {cell}: |J| = {}, c = {c}", j.norm());
            assert!((j.normalize() - omega.vector()).norm() < 1e-6);
        }
    }

    #[test]
    fn bad_mu_rejected() {
        assert!(c_of_mu(&unit_const(), 0.0, Dim::Two).is_err());
        assert!(c_of_mu(&unit_const(), f64::NAN, Dim::Three).is_err());
        assert!(Equilibrium::new(&unit_const(), -1.0, Dim::Two).is_err());
    }
}
