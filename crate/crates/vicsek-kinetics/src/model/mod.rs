//! Model ingredients of the alignment dynamics: the frequency law ν, the
//! interaction kernel K, flux/director moments, von Mises equilibria, and the
//! expanded force coefficients (ψ₁, ψ₂, ψ₃).

mod equilibrium;
mod force;
mod frequency;
mod kernel;
mod moments;

pub use equilibrium::{c_of_mu, Equilibrium};
pub use force::{force_coefficients, ForceCoefficients};
pub(crate) use force::force_ab_into;
pub use frequency::FrequencySpec;
pub use kernel::{KernelOnGrid, KernelSpec};
pub use moments::{director_eps, flux_j, total_flux, MomentField};
pub(crate) use moments::flux_j_raw;

use crate::field::{FieldError, LpOrder};
use crate::sphere::SphereError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid frequency law: {0}")]
    BadFrequency(String),
    #[error("invalid kernel: {0}")]
    BadKernel(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("director undefined with eps = 0: |J| = {flux_norm:e} in cell {cell} is at or below the degeneracy floor {floor:e}")]
    DirectorUndefined { cell: usize, flux_norm: f64, floor: f64 },
    #[error("non-finite {what} in cell {cell}")]
    NonFinite { what: &'static str, cell: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// Exponential growth rate of the a-priori L^p envelope
/// ‖f(t)‖_p ≤ e^{rate·t} ‖f₀‖_p for the growth constant
/// C = ‖ν′‖∞ + d‖ν‖∞ (see [`FrequencySpec::growth_constant`]):
/// rate = C·p/(p−1) for finite p > 1, C for p = ∞, and 0 for p = 1
/// (the L¹ norm of a nonnegative solution is the conserved mass).
pub fn envelope_rate(growth_constant: f64, p: LpOrder) -> f64 {
    match p {
        LpOrder::Infinity => growth_constant,
        LpOrder::Finite(p) if p <= 1.0 => 0.0,
        LpOrder::Finite(p) => growth_constant * p / (p - 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_rates() {
        assert_eq!(envelope_rate(2.0, LpOrder::Finite(1.0)), 0.0);
        assert_eq!(envelope_rate(2.0, LpOrder::Finite(2.0)), 4.0);
        assert_eq!(envelope_rate(2.0, LpOrder::Infinity), 2.0);
    }
}
