//! Gauss–Legendre quadrature and a graded composite rule for the sharply
//! peaked exponential integrands of the alignment-equilibrium theory.
//!
//! The order-parameter and normalization integrals have the shape
//! ∫_{−1}^{1} g(u) e^{σ(u)/μ} du with σ increasing on [−1, 1]. For small μ the
//! integrand is a boundary layer of width O(μ) at u = 1 and e^{σ(1)/μ}
//! overflows f64 well before μ reaches 1e-3, so the composite rule below
//! (a) factors the global maximum e^{σ(1)/μ} out of every integral and
//! (b) grades panel widths geometrically toward u = 1 at scale μ.

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Newton iteration on the Legendre recurrence; exact for polynomials of
/// degree ≤ 2n−1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrates `f` over [a, b] with an n-point Gauss–Legendre rule.
pub fn integrate_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Panel edges for the graded decomposition of [−1, 1] toward u = 1.
fn graded_panels(mu: f64) -> Vec<f64> {
    let mut edges = vec![1.0];
    if mu >= 2.0 {
        edges.push(0.0);
        edges.push(-1.0);
        return edges;
    }
    let mut width = mu;
    let mut u = 1.0 - width;
    while u > -1.0 {
        edges.push(u);
        width *= 2.0;
        u -= width;
    }
    edges.push(-1.0);
    edges
}

/// Result of the shifted equilibrium integrals on [−1, 1].
pub struct ExpMoments {
    /// ∫ e^{(σ(u)−σ(1))/μ} du
    pub z_shifted: f64,
    /// ∫ u e^{(σ(u)−σ(1))/μ} du
    pub first_moment_shifted: f64,
}

/// Computes the shifted zeroth and first u-moments of e^{σ(u)/μ} on [−1, 1]
/// by composite Gauss–Legendre with panels graded toward u = 1.
///
/// `sigma` must be nondecreasing on [−1, 1] (an antiderivative of a
/// nonnegative frequency), so the shift σ(1) is the global maximum and the
/// shifted integrand is ≤ 1 everywhere: overflow-safe for any μ > 0.
pub fn exp_moments(sigma: &dyn Fn(f64) -> f64, mu: f64) -> ExpMoments {
    assert!(mu > 0.0, "mu must be positive");
    let s1 = sigma(1.0);
    let shifted = |u: f64| ((sigma(u) - s1) / mu).exp();
    let edges = graded_panels(mu);
    const NODES_PER_PANEL: usize = 32;
    let (nodes, weights) = gauss_legendre(NODES_PER_PANEL);
    let mut z = 0.0;
    let mut m1 = 0.0;
    for pair in edges.windows(2) {
        let (hi, lo) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&x, &w) in nodes.iter().zip(&weights) {
            let u = mid + half * x;
            let e = w * half * shifted(u);
            z += e;
            m1 += u * e;
        }
    }
    ExpMoments { z_shifted: z, first_moment_shifted: m1 }
}

/// Computes the shifted zeroth and first cos-moments of θ ↦ e^{σ(cos θ)/μ}
/// over the full circle:
///
///   z_shifted            = ∫₀^{2π} e^{(σ(cos θ) − σ(1))/μ} dθ,
///   first_moment_shifted = ∫₀^{2π} cos θ · e^{(σ(cos θ) − σ(1))/μ} dθ.
///
/// The integrand concentrates at θ = 0 with angular width ~√(μ/ν(1)) as
/// μ → 0, so panels are graded in θ away from 0 at that scale (`nu_one` is
/// ν(1) = σ′(1)); symmetry about θ = π halves the work. Same shift-by-σ(1)
/// overflow safety as [`exp_moments`].
pub fn circle_exp_moments(sigma: &dyn Fn(f64) -> f64, nu_one: f64, mu: f64) -> ExpMoments {
    assert!(mu > 0.0, "mu must be positive");
    use std::f64::consts::PI;
    let s1 = sigma(1.0);
    let shifted = |theta: f64| ((sigma(theta.cos()) - s1) / mu).exp();
    let scale = (mu / nu_one.max(1.0)).sqrt().clamp(1e-8, PI / 4.0);
    let mut edges = vec![0.0];
    let mut width = scale;
    let mut t = scale;
    while t < PI {
        edges.push(t);
        width *= 2.0;
        t += width;
    }
    edges.push(PI);
    const NODES_PER_PANEL: usize = 32;
    let (nodes, weights) = gauss_legendre(NODES_PER_PANEL);
    let mut z = 0.0;
    let mut m1 = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&x, &w) in nodes.iter().zip(&weights) {
            let theta = mid + half * x;
            let e = w * half * shifted(theta);
            z += e;
            m1 += theta.cos() * e;
        }
    }
    // θ and 2π − θ contribute identically to both moments
    ExpMoments { z_shifted: 2.0 * z, first_moment_shifted: 2.0 * m1 }
}

/// Modified Bessel function I_n of the first kind by power series.
///
/// Test oracle shared across the crate's unit tests; overflow-safe for
/// z ≲ 600 (terms grow like e^z).
#[cfg(test)]
pub(crate) fn bessel_i(n: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = half.powi(n as i32);
    for k in 1..=n as usize {
        term /= k as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= half * half / (k * (k + n as f64));
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule_matches_reference_values() {
        let (nodes, weights) = gauss_legendre(5);
        let ref_nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let ref_weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert!((nodes[i] - ref_nodes[i]).abs() < 1e-14);
            assert!((weights[i] - ref_weights[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_exactness() {
        // 2n−1 = 127 for n = 64: x^126 integrates exactly.
        let exact = 2.0 / 127.0;
        let got = integrate_gl(&|x: f64| x.powi(126), -1.0, 1.0, 64);
        assert!((got - exact).abs() < 1e-15);
        // odd powers vanish
        let odd = integrate_gl(&|x: f64| x.powi(9), -1.0, 1.0, 16);
        assert!(odd.abs() < 1e-16);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [2, 8, 33, 64, 100] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
    }

    /// Langevin closed form: for σ(u) = u, ∫u e^{u/μ}/∫e^{u/μ} = coth(1/μ) − μ.
    fn langevin(mu: f64) -> f64 {
        let x = 1.0 / mu;
        1.0 / x.tanh() - mu
    }

    #[test]
    fn graded_moments_match_langevin_function() {
        for &mu in &[1e-3, 1e-2, 0.1, 0.2, 0.5, 1.0, 2.0, 10.0, 1e3] {
            let m = exp_moments(&|u| u, mu);
            let ratio = m.first_moment_shifted / m.z_shifted;
            let exact = langevin(mu);
            assert!(
                (ratio - exact).abs() < 1e-12,
                "mu={mu}: ratio={ratio}, exact={exact}"
            );
        }
    }

    #[test]
    fn shifted_partition_function_matches_closed_form() {
        // ∫_{−1}^{1} e^{(u−1)/μ} du = μ(1 − e^{−2/μ})
        for &mu in &[0.05, 0.5, 5.0] {
            let m = exp_moments(&|u| u, mu);
            let exact = mu * (1.0 - (-2.0 / mu).exp());
            assert!((m.z_shifted - exact).abs() < 1e-13 * exact);
        }
    }

    #[test]
    fn zero_sigma_gives_uniform_moments() {
        let m = exp_moments(&|_| 0.0, 3.7);
        assert!((m.z_shifted - 2.0).abs() < 1e-13);
        assert!(m.first_moment_shifted.abs() < 1e-14);
    }

    #[test]
    fn circle_moments_match_bessel_ratio() {
        // σ(u) = u on the circle: ratio = I₁(1/μ)/I₀(1/μ)
        for &mu in &[0.1, 0.2, 0.5, 1.0, 5.0] {
            let m = circle_exp_moments(&|u| u, 1.0, mu);
            let z = 1.0 / mu;
            let exact = bessel_i(1, z) / bessel_i(0, z);
            let ratio = m.first_moment_shifted / m.z_shifted;
            assert!(
                (ratio - exact).abs() < 1e-12,
                "mu={mu}: ratio={ratio}, exact={exact}"
            );
        }
    }

    #[test]
    fn circle_partition_function_matches_bessel() {
        // ∫₀^{2π} e^{(cos θ − 1)/μ} dθ = 2π e^{−1/μ} I₀(1/μ)
        use std::f64::consts::PI;
        for &mu in &[0.1, 0.5, 2.0] {
            let m = circle_exp_moments(&|u| u, 1.0, mu);
            let z = 1.0 / mu;
            let exact = 2.0 * PI * (-z).exp() * bessel_i(0, z);
            assert!(
                (m.z_shifted - exact).abs() < 1e-12 * exact,
                "mu={mu}: got {}, exact {exact}",
                m.z_shifted
            );
        }
    }

    #[test]
    fn circle_moments_small_mu_asymptotics() {
        // I₁(z)/I₀(z) for large z via the standard asymptotic series
        // I_ν(z) ~ e^z/√(2πz) Σ_k (−1)^k a_k(ν) z^{−k},
        // a_k(ν) = ∏_{j=1..k} (4ν² − (2j−1)²) / (k! 8^k); truncation error
        // here is O(z^{−4}) ≈ 1e-12 at z = 1000.
        let z: f64 = 1000.0; // mu = 1e-3
        let num = 1.0 - 3.0 / (8.0 * z) - 15.0 / (128.0 * z * z) - 105.0 / (1024.0 * z * z * z);
        let den = 1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z) + 75.0 / (1024.0 * z * z * z);
        let exact = num / den;
        let m = circle_exp_moments(&|u| u, 1.0, 1e-3);
        let ratio = m.first_moment_shifted / m.z_shifted;
        assert!((ratio - exact).abs() < 1e-9, "ratio={ratio}, exact={exact}");
        assert!(ratio > 0.998);
    }

    #[test]
    fn circle_zero_sigma_uniform() {
        let m = circle_exp_moments(&|_| 0.0, 0.0, 1.0);
        assert!((m.z_shifted - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(m.first_moment_shifted.abs() < 1e-13);
    }
}
