//! Alignment-frequency laws ν as functions of the alignment cosine
//! u = ω·Ω̄ ∈ [−1, 1], together with the derived quantities the rest of the
//! crate needs: ν′, the antiderivative σ (normalized to σ(0) = 0), sup norms
//! on [−1, 1], and the growth constant of the L^p envelopes.

use super::ModelError;
use crate::sphere::Dim;
use serde::Serialize;

/// A smooth nonnegative frequency law on [−1, 1].
///
/// Three families are supported: a constant (zero turns the alignment force
/// off entirely), an affine law `base + slope·u` with base > |slope| so the
/// frequency stays strictly positive, and a tabulated law interpolated by a
/// natural cubic spline through supplied knots covering [−1, 1].
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FrequencySpec {
    Constant { value: f64 },
    Affine { base: f64, slope: f64 },
    TabulatedSmooth { spline: Spline },
}

impl FrequencySpec {
    pub fn constant(value: f64) -> Result<Self, ModelError> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(ModelError::BadFrequency(format!(
                "constant frequency must be finite and >= 0, got {value}"
            )));
        }
        Ok(FrequencySpec::Constant { value })
    }

    pub fn affine(base: f64, slope: f64) -> Result<Self, ModelError> {
        if !(base.is_finite() && slope.is_finite() && base > slope.abs()) {
            return Err(ModelError::BadFrequency(format!(
                "affine frequency requires base > |slope| (strict positivity), got base {base}, slope {slope}"
            )));
        }
        Ok(FrequencySpec::Affine { base, slope })
    }

    /// Natural cubic spline through `(knots[i], values[i])`; the knots must
    /// be strictly increasing and span exactly [−1, 1], and the interpolant
    /// must stay nonnegative (checked against its exact piecewise extrema).
    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        let spline = Spline::natural(knots, values)?;
        if spline.min_value < -1e-12 * (1.0 + spline.max_value.abs()) {
            return Err(ModelError::BadFrequency(format!(
                "tabulated frequency dips negative between knots (min {:e}); supply data whose spline stays >= 0",
                spline.min_value
            )));
        }
        Ok(FrequencySpec::TabulatedSmooth { spline })
    }

    /// ν(u). The argument is the alignment cosine; values a hair outside
    /// [−1, 1] from roundoff are clamped.
    pub fn nu(&self, u: f64) -> f64 {
        let u = clamp_cosine(u);
        match self {
            FrequencySpec::Constant { value } => *value,
            FrequencySpec::Affine { base, slope } => base + slope * u,
            FrequencySpec::TabulatedSmooth { spline } => spline.eval(u),
        }
    }

    /// ν′(u).
    pub fn nu_prime(&self, u: f64) -> f64 {
        let u = clamp_cosine(u);
        match self {
            FrequencySpec::Constant { .. } => 0.0,
            FrequencySpec::Affine { slope, .. } => *slope,
            FrequencySpec::TabulatedSmooth { spline } => spline.eval_deriv(u),
        }
    }

    /// σ(u) = ∫₀ᵘ ν, the antiderivative normalized by σ(0) = 0.
    pub fn sigma(&self, u: f64) -> f64 {
        let u = clamp_cosine(u);
        match self {
            FrequencySpec::Constant { value } => value * u,
            FrequencySpec::Affine { base, slope } => base * u + 0.5 * slope * u * u,
            FrequencySpec::TabulatedSmooth { spline } => spline.antiderivative(u) - spline.sigma_zero,
        }
    }

    /// ‖ν‖_{L^∞[−1,1]}.
    pub fn sup_nu(&self) -> f64 {
        match self {
            FrequencySpec::Constant { value } => *value,
            FrequencySpec::Affine { base, slope } => base + slope.abs(),
            FrequencySpec::TabulatedSmooth { spline } => spline.max_value.max(-spline.min_value),
        }
    }

    /// ‖ν′‖_{L^∞[−1,1]}.
    pub fn sup_nu_prime(&self) -> f64 {
        match self {
            FrequencySpec::Constant { .. } => 0.0,
            FrequencySpec::Affine { slope, .. } => slope.abs(),
            FrequencySpec::TabulatedSmooth { spline } => spline.sup_deriv,
        }
    }

    /// Whether the alignment force is identically off (ν ≡ 0).
    pub fn is_zero(&self) -> bool {
        self.sup_nu() == 0.0
    }

    /// Growth constant C = ‖ν′‖∞ + ‖ν‖∞ + (d−1)‖ν‖∞ of the L^p envelopes,
    /// where d is the ambient dimension of the velocity sphere.
    pub fn growth_constant(&self, dim: Dim) -> f64 {
        self.sup_nu_prime() + dim.ambient() as f64 * self.sup_nu()
    }
}

fn clamp_cosine(u: f64) -> f64 {
    debug_assert!(
        u.is_finite() && u.abs() <= 1.0 + 1e-6,
        "alignment cosine far outside [-1, 1]: {u}"
    );
    u.clamp(-1.0, 1.0)
}

/// Natural cubic spline on strictly increasing knots spanning [−1, 1], with
/// precomputed piecewise extrema and antiderivative values at the knots.
#[derive(Clone, Debug, Serialize)]
pub struct Spline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots (natural: zero at both ends).
    #[serde(skip)]
    second: Vec<f64>,
    /// Antiderivative from knots[0] accumulated at each knot.
    #[serde(skip)]
    anti_knots: Vec<f64>,
    #[serde(skip)]
    sigma_zero: f64,
    #[serde(skip)]
    min_value: f64,
    #[serde(skip)]
    max_value: f64,
    #[serde(skip)]
    sup_deriv: f64,
}

impl Spline {
    fn natural(mut knots: Vec<f64>, values: Vec<f64>) -> Result<Self, ModelError> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(ModelError::BadFrequency(format!(
                "tabulated frequency needs >= 3 knots with matching values, got {} knots / {} values",
                n,
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(ModelError::BadFrequency("tabulated frequency data must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::BadFrequency("tabulated knots must be strictly increasing".into()));
        }
        if (knots[0] + 1.0).abs() > 1e-9 || (knots[n - 1] - 1.0).abs() > 1e-9 {
            return Err(ModelError::BadFrequency(format!(
                "tabulated knots must span [-1, 1], got [{}, {}]",
                knots[0],
                knots[n - 1]
            )));
        }
        knots[0] = -1.0;
        knots[n - 1] = 1.0;

        // Natural-spline second derivatives: tridiagonal Thomas solve on the
        // n−2 interior knots.
        let mut second = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0;
            }
            // forward sweep (lower[i] = h_i/6 = upper[i−1])
            for i in 1..m {
                let lower = upper[i - 1];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }

        // Per-piece cubic S(t) = a + b t + c t² + d t³, t = u − knots[i],
        // exact extrema of S and S′, and antiderivative at the knots.
        let mut anti_knots = vec![0.0; n];
        let mut min_value = f64::INFINITY;
        let mut max_value = f64::NEG_INFINITY;
        let mut sup_deriv = 0.0f64;
        for i in 0..n - 1 {
            let (a, b, c, d, h) = piece_coeffs(&knots, &values, &second, i);
            anti_knots[i + 1] =
                anti_knots[i] + h * (a + h * (b / 2.0 + h * (c / 3.0 + h * d / 4.0)));
            let eval = |t: f64| a + t * (b + t * (c + t * d));
            let deriv = |t: f64| b + t * (2.0 * c + t * 3.0 * d);
            let mut candidates = vec![0.0, h];
            for t in quadratic_roots(3.0 * d, 2.0 * c, b) {
                if t > 0.0 && t < h {
                    candidates.push(t);
                }
            }
            for &t in &candidates {
                let v = eval(t);
                min_value = min_value.min(v);
                max_value = max_value.max(v);
            }
            let mut dcands = vec![0.0, h];
            if d != 0.0 {
                let t = -c / (3.0 * d);
                if t > 0.0 && t < h {
                    dcands.push(t);
                }
            }
            for &t in &dcands {
                sup_deriv = sup_deriv.max(deriv(t).abs());
            }
        }

        let mut spline = Spline {
            knots,
            values,
            second,
            anti_knots,
            sigma_zero: 0.0,
            min_value,
            max_value,
            sup_deriv,
        };
        spline.sigma_zero = spline.antiderivative(0.0);
        Ok(spline)
    }

    fn piece(&self, u: f64) -> usize {
        // rightmost piece whose left knot is <= u
        let i = self.knots.partition_point(|&k| k <= u);
        i.saturating_sub(1).min(self.knots.len() - 2)
    }

    fn eval(&self, u: f64) -> f64 {
        let i = self.piece(u);
        let (a, b, c, d, _) = piece_coeffs(&self.knots, &self.values, &self.second, i);
        let t = u - self.knots[i];
        a + t * (b + t * (c + t * d))
    }

    fn eval_deriv(&self, u: f64) -> f64 {
        let i = self.piece(u);
        let (_, b, c, d, _) = piece_coeffs(&self.knots, &self.values, &self.second, i);
        let t = u - self.knots[i];
        b + t * (2.0 * c + t * 3.0 * d)
    }

    /// ∫ from knots[0] to u of the spline.
    fn antiderivative(&self, u: f64) -> f64 {
        let i = self.piece(u);
        let (a, b, c, d, _) = piece_coeffs(&self.knots, &self.values, &self.second, i);
        let t = u - self.knots[i];
        self.anti_knots[i] + t * (a + t * (b / 2.0 + t * (c / 3.0 + t * d / 4.0)))
    }
}

/// Coefficients of piece i as S(t) = a + b t + c t² + d t³ on t ∈ [0, h].
fn piece_coeffs(knots: &[f64], values: &[f64], second: &[f64], i: usize) -> (f64, f64, f64, f64, f64) {
    let h = knots[i + 1] - knots[i];
    let a = values[i];
    let b = (values[i + 1] - values[i]) / h - h * (2.0 * second[i] + second[i + 1]) / 6.0;
    let c = second[i] / 2.0;
    let d = (second[i + 1] - second[i]) / (6.0 * h);
    (a, b, c, d, h)
}

/// Real roots of q x² + l x + k = 0 (numerically stable split form).
fn quadratic_roots(q: f64, l: f64, k: f64) -> Vec<f64> {
    if q == 0.0 {
        if l == 0.0 {
            return vec![];
        }
        return vec![-k / l];
    }
    let disc = l * l - 4.0 * q * k;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let big = -(l + l.signum() * sq) / 2.0;
    if big == 0.0 {
        return vec![0.0];
    }
    vec![big / q, k / big]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::Dim;

    #[test]
    fn constant_family_closed_forms() {
        let nu = FrequencySpec::constant(1.5).unwrap();
        assert_eq!(nu.nu(0.3), 1.5);
        assert_eq!(nu.nu_prime(-0.7), 0.0);
        assert_eq!(nu.sigma(0.0), 0.0);
        assert!((nu.sigma(0.4) - 0.6).abs() < 1e-15);
        assert_eq!(nu.sup_nu(), 1.5);
        assert_eq!(nu.sup_nu_prime(), 0.0);
        assert!(!nu.is_zero());
        assert!(FrequencySpec::constant(0.0).unwrap().is_zero());
        assert!(FrequencySpec::constant(-0.1).is_err());
        // unit constant law in the plane: C = 0 + 2·1
        assert_eq!(FrequencySpec::constant(1.0).unwrap().growth_constant(Dim::Two), 2.0);
        assert_eq!(FrequencySpec::constant(1.0).unwrap().growth_constant(Dim::Three), 3.0);
    }

    #[test]
    fn affine_family_closed_forms() {
        let nu = FrequencySpec::affine(1.0, 0.5).unwrap();
        assert!((nu.nu(0.6) - 1.3).abs() < 1e-15);
        assert_eq!(nu.nu_prime(0.1), 0.5);
        // σ(u) = u + u²/4
        assert!((nu.sigma(0.8) - (0.8 + 0.16)).abs() < 1e-15);
        assert_eq!(nu.sigma(0.0), 0.0);
        assert_eq!(nu.sup_nu(), 1.5);
        assert_eq!(nu.sup_nu_prime(), 0.5);
        assert!((nu.growth_constant(Dim::Two) - 3.5).abs() < 1e-15);
        assert!(FrequencySpec::affine(0.5, 0.5).is_err());
        assert!(FrequencySpec::affine(0.5, -0.6).is_err());
    }

    #[test]
    fn spline_reproduces_affine_data_exactly() {
        // a natural cubic spline through samples of an affine function is
        // that affine function (zero second derivatives solve the system)
        let exact = FrequencySpec::affine(1.0, 0.4).unwrap();
        let knots: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
        let values: Vec<f64> = knots.iter().map(|&u| exact.nu(u)).collect();
        let tab = FrequencySpec::tabulated(knots, values).unwrap();
        for &u in &[-1.0, -0.93, -0.4, 0.0, 0.11, 0.625, 1.0] {
            assert!((tab.nu(u) - exact.nu(u)).abs() < 1e-14, "nu at {u}");
            assert!((tab.nu_prime(u) - 0.4).abs() < 1e-13, "nu' at {u}");
            assert!((tab.sigma(u) - exact.sigma(u)).abs() < 1e-14, "sigma at {u}");
        }
        assert!((tab.sup_nu() - 1.4).abs() < 1e-13);
        assert!((tab.sup_nu_prime() - 0.4).abs() < 1e-13);
    }

    #[test]
    fn spline_converges_to_smooth_law() {
        // dense tabulation of ν(u) = 1 + u²/2: interior error is O(h⁴), with
        // the natural end condition costing O(h²) only near ±1
        let f = |u: f64| 1.0 + 0.5 * u * u;
        let fp = |u: f64| u;
        let sig = |u: f64| u + u * u * u / 6.0;
        let n = 81;
        let knots: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = knots.iter().map(|&u| f(u)).collect();
        let tab = FrequencySpec::tabulated(knots, values).unwrap();
        for &u in &[-0.71, -0.33, 0.0, 0.21, 0.67] {
            assert!((tab.nu(u) - f(u)).abs() < 1e-6, "nu at {u}: {}", tab.nu(u) - f(u));
            assert!((tab.nu_prime(u) - fp(u)).abs() < 1e-4);
            assert!((tab.sigma(u) - sig(u)).abs() < 1e-5, "sigma at {u}");
        }
        assert_eq!(tab.sigma(0.0), 0.0);
        assert!((tab.sup_nu() - 1.5).abs() < 1e-4);
    }

    #[test]
    fn spline_extrema_found_between_knots() {
        // symmetric bump peaking between knots: max exceeds every knot value
        let knots = vec![-1.0, -0.5, 0.5, 1.0];
        let values = vec![0.0, 1.0, 1.0, 0.0];
        let tab = FrequencySpec::tabulated(knots, values).unwrap();
        let sup = tab.sup_nu();
        assert!(sup > 1.0, "interior maximum missed: {sup}");
        assert!((tab.nu(0.0) - sup).abs() < 1e-12, "peak should sit at u = 0");
    }

    #[test]
    fn spline_validation_errors() {
        assert!(FrequencySpec::tabulated(vec![-1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(FrequencySpec::tabulated(vec![-1.0, 0.5, 0.2, 1.0], vec![1.0; 4]).is_err());
        assert!(FrequencySpec::tabulated(vec![-0.9, 0.0, 1.0], vec![1.0; 3]).is_err());
        // spline dipping negative between nonnegative knots is rejected
        let knots = vec![-1.0, -0.2, -0.1, 0.1, 0.2, 1.0];
        let values = vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        assert!(FrequencySpec::tabulated(knots, values).is_err());
    }

    #[test]
    fn quadratic_root_helper() {
        let mut r = quadratic_roots(1.0, -3.0, 2.0);
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
        assert_eq!(quadratic_roots(0.0, 2.0, -4.0), vec![2.0]);
        assert!(quadratic_roots(1.0, 0.0, 1.0).is_empty());
    }
}
