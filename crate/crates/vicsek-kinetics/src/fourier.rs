//! Thin spectral toolbox over rustfft for periodic grids.
//!
//! Everything here works on a uniform periodic grid of `n` nodes spanning a
//! domain of given `length`; wavenumbers are `2π m / length` with the signed
//! integer convention `m ∈ {0, 1, …, n/2, −n/2+1, …, −1}`. Used for angular
//! differentiation on S¹, exact constant-speed transport on the torus, and
//! periodic convolution.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Cached FFT plans plus the wavenumber table for one periodic axis.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed wavenumbers 2π m / length; index n/2 (even n) is the Nyquist mode.
    k: Vec<f64>,
}

impl Spectral {
    /// Plans transforms for `n` nodes on a periodic domain of length `length`.
    pub fn new(n: usize, length: f64) -> Self {
        assert!(n >= 2, "spectral axis needs at least 2 nodes");
        assert!(length > 0.0, "domain length must be positive");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = 2.0 * std::f64::consts::PI / length;
        let k = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                base * m as f64
            })
            .collect();
        Spectral { n, forward, inverse, k }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Forward transform of real samples into `out` (unnormalized).
    pub fn forward_into(&self, input: &[f64], out: &mut [Complex<f64>]) {
        debug_assert_eq!(input.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (o, &v) in out.iter_mut().zip(input) {
            *o = Complex::new(v, 0.0);
        }
        self.forward.process(out);
    }

    /// Inverse transform; consumes `spec` in place and writes the real part
    /// (normalized by 1/n) into `out`.
    pub fn inverse_real_into(&self, spec: &mut [Complex<f64>], out: &mut [f64]) {
        debug_assert_eq!(spec.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        self.inverse.process(spec);
        let scale = 1.0 / self.n as f64;
        for (o, s) in out.iter_mut().zip(spec.iter()) {
            *o = s.re * scale;
        }
    }

    /// Multiplies a spectrum by ik (first derivative). The Nyquist mode is
    /// zeroed: it carries no sign information for a real signal's odd
    /// derivative.
    pub fn apply_derivative(&self, spec: &mut [Complex<f64>]) {
        for (s, &k) in spec.iter_mut().zip(&self.k) {
            *s *= Complex::new(0.0, k);
        }
        if self.n % 2 == 0 {
            spec[self.n / 2] = Complex::new(0.0, 0.0);
        }
    }

    /// Multiplies a spectrum by −k² (second derivative / Laplacian on the axis).
    pub fn apply_second_derivative(&self, spec: &mut [Complex<f64>]) {
        for (s, &k) in spec.iter_mut().zip(&self.k) {
            *s *= -k * k;
        }
    }

    /// Multiplies a spectrum by the translation factor so the result samples
    /// f(x − s): mode k picks up e^{−iks}. The Nyquist mode gets the real
    /// factor cos(ks), the correct symmetric treatment for real signals.
    pub fn apply_shift(&self, spec: &mut [Complex<f64>], s: f64) {
        for (c, &k) in spec.iter_mut().zip(&self.k) {
            let phase = -k * s;
            *c *= Complex::new(phase.cos(), phase.sin());
        }
        if self.n % 2 == 0 {
            let k = self.k[self.n / 2];
            // undo the complex factor applied above, then apply cos(ks)
            let phase = -k * s;
            let undo = Complex::new(phase.cos(), -phase.sin());
            spec[self.n / 2] *= undo * (k * s).cos();
        }
    }

    /// Backward-Euler angular diffusion: divides mode k by (1 + μ k² dt).
    pub fn apply_implicit_diffusion(&self, spec: &mut [Complex<f64>], mu: f64, dt: f64) {
        for (s, &k) in spec.iter_mut().zip(&self.k) {
            *s /= 1.0 + mu * k * k * dt;
        }
    }

    /// Spectral first derivative of real samples (allocating convenience).
    pub fn derivative(&self, input: &[f64]) -> Vec<f64> {
        let mut spec = vec![Complex::new(0.0, 0.0); self.n];
        let mut out = vec![0.0; self.n];
        self.forward_into(input, &mut spec);
        self.apply_derivative(&mut spec);
        self.inverse_real_into(&mut spec, &mut out);
        out
    }

    /// Spectral second derivative of real samples (allocating convenience).
    pub fn second_derivative(&self, input: &[f64]) -> Vec<f64> {
        let mut spec = vec![Complex::new(0.0, 0.0); self.n];
        let mut out = vec![0.0; self.n];
        self.forward_into(input, &mut spec);
        self.apply_second_derivative(&mut spec);
        self.inverse_real_into(&mut spec, &mut out);
        out
    }

    /// Translates real samples: output\[j\] = f(x_j − s) for grid-smooth f.
    pub fn shift(&self, input: &[f64], s: f64) -> Vec<f64> {
        let mut spec = vec![Complex::new(0.0, 0.0); self.n];
        let mut out = vec![0.0; self.n];
        self.forward_into(input, &mut spec);
        self.apply_shift(&mut spec, s);
        self.inverse_real_into(&mut spec, &mut out);
        out
    }
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, length: f64) -> Vec<f64> {
        (0..n).map(|j| length * j as f64 / n as f64).collect()
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let n = 64;
        let sp = Spectral::new(n, 2.0 * PI);
        let xs = grid(n, 2.0 * PI);
        let f: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
        let df = sp.derivative(&f);
        for (x, d) in xs.iter().zip(&df) {
            assert!((d - x.cos()).abs() < 1e-12, "at x={x}: {d} vs {}", x.cos());
        }
    }

    #[test]
    fn derivative_respects_domain_length() {
        let n = 32;
        let length = 1.0;
        let sp = Spectral::new(n, length);
        let xs = grid(n, length);
        let f: Vec<f64> = xs.iter().map(|&x| (2.0 * PI * x).cos()).collect();
        let df = sp.derivative(&f);
        for (x, d) in xs.iter().zip(&df) {
            let exact = -2.0 * PI * (2.0 * PI * x).sin();
            assert!((d - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn second_derivative_eigenmode() {
        let n = 64;
        let sp = Spectral::new(n, 2.0 * PI);
        let xs = grid(n, 2.0 * PI);
        let f: Vec<f64> = xs.iter().map(|&x| (3.0 * x).cos()).collect();
        let d2 = sp.second_derivative(&f);
        for (v, d) in f.iter().zip(&d2) {
            assert!((d + 9.0 * v).abs() < 1e-11);
        }
    }

    #[test]
    fn shift_is_exact_for_smooth_data_and_preserves_mean() {
        let n = 32;
        let sp = Spectral::new(n, 2.0 * PI);
        let xs = grid(n, 2.0 * PI);
        let f: Vec<f64> = xs.iter().map(|&x| 1.0 + 0.3 * x.sin() + 0.1 * (2.0 * x).cos()).collect();
        let s = 0.1234;
        let g = sp.shift(&f, s);
        for (x, v) in xs.iter().zip(&g) {
            let exact = 1.0 + 0.3 * (x - s).sin() + 0.1 * (2.0 * (x - s)).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        let mean_f: f64 = f.iter().sum();
        let mean_g: f64 = g.iter().sum();
        assert!((mean_f - mean_g).abs() < 1e-12 * mean_f.abs());
    }

    #[test]
    fn shift_by_whole_grid_cell_is_a_rotation() {
        let n = 16;
        let sp = Spectral::new(n, 2.0 * PI);
        // Nyquist-heavy data: alternating signs. Shifting by one cell must
        // reproduce the rotated samples (cos treatment of the Nyquist mode).
        let f: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let g = sp.shift(&f, 2.0 * PI / n as f64);
        for (j, v) in g.iter().enumerate() {
            let rot = f[(j + n - 1) % n];
            assert!((v - rot).abs() < 1e-12, "node {j}: {v} vs {rot}");
        }
    }

    #[test]
    fn implicit_diffusion_damps_modes() {
        let n = 64;
        let sp = Spectral::new(n, 2.0 * PI);
        let xs = grid(n, 2.0 * PI);
        let f: Vec<f64> = xs.iter().map(|&x| (4.0 * x).cos()).collect();
        let mut spec = vec![Complex::new(0.0, 0.0); n];
        let mut out = vec![0.0; n];
        sp.forward_into(&f, &mut spec);
        sp.apply_implicit_diffusion(&mut spec, 0.5, 0.1);
        sp.inverse_real_into(&mut spec, &mut out);
        let factor = 1.0 / (1.0 + 0.5 * 16.0 * 0.1);
        for (v, o) in f.iter().zip(&out) {
            assert!((o - factor * v).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_identity() {
        let n = 48; // non power of two is fine for rustfft
        let sp = Spectral::new(n, 1.0);
        let f: Vec<f64> = (0..n).map(|j| (j as f64 * 0.7).sin() + 0.2).collect();
        let mut spec = vec![Complex::new(0.0, 0.0); n];
        let mut out = vec![0.0; n];
        sp.forward_into(&f, &mut spec);
        sp.inverse_real_into(&mut spec, &mut out);
        for (a, b) in f.iter().zip(&out) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
