//! Spatial interaction kernels and their periodic convolution on the torus
//! grid.
//!
//! A kernel is sampled at cell displacements with minimum-image distances and
//! renormalized so its discrete integral is exactly 1; the Dirac kernel skips
//! convolution entirely, making purely local coupling the common limit of the
//! nonlocal families.

use super::ModelError;
use crate::field::SpatialGrid;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Purely local coupling: K ⋆ g = g.
    Dirac,
    /// Normalized indicator of the ball of the given radius.
    TopHat { radius: f64 },
    /// Normalized Gaussian of the given width (standard deviation).
    Gaussian { width: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = match self {
            KernelSpec::Dirac => true,
            KernelSpec::TopHat { radius } => radius.is_finite() && *radius > 0.0,
            KernelSpec::Gaussian { width } => width.is_finite() && *width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::BadKernel(format!("nonpositive or non-finite scale in {self:?}")))
        }
    }

    /// Interaction radius for particle neighbor search (top-hat only; the
    /// particle dynamics couples through hard R-balls).
    pub fn interaction_radius(&self) -> Option<f64> {
        match self {
            KernelSpec::TopHat { radius } => Some(*radius),
            _ => None,
        }
    }

    /// Kernel samples K(x_cell) with minimum-image displacements, scaled so
    /// that Σ K · ΔV = 1 exactly. `None` for the Dirac kernel.
    pub fn sample(&self, grid: &SpatialGrid) -> Result<Option<Vec<f64>>, ModelError> {
        self.validate()?;
        let value: Box<dyn Fn(f64) -> f64> = match self {
            KernelSpec::Dirac => return Ok(None),
            KernelSpec::TopHat { radius } => {
                let r2 = radius * radius;
                Box::new(move |d2| if d2 <= r2 { 1.0 } else { 0.0 })
            }
            KernelSpec::Gaussian { width } => {
                let two_w2 = 2.0 * width * width;
                Box::new(move |d2| (-d2 / two_w2).exp())
            }
        };
        let mut samples = Vec::with_capacity(grid.n_cells());
        for cell in 0..grid.n_cells() {
            let [x, y] = grid.position(cell);
            let dx = min_image(x, grid.length_axis(0));
            let dy = if grid.dims() == 2 { min_image(y, grid.length_axis(1)) } else { 0.0 };
            samples.push(value(dx * dx + dy * dy));
        }
        // the zero-displacement sample is 1 for both families, so the sum is
        // bounded away from zero
        let total: f64 = samples.iter().sum::<f64>() * grid.cell_volume();
        for v in &mut samples {
            *v /= total;
        }
        Ok(Some(samples))
    }

    /// Prepares the kernel for repeated convolutions on one grid.
    pub fn on_grid(&self, grid: &SpatialGrid) -> Result<KernelOnGrid, ModelError> {
        match self.sample(grid)? {
            None => Ok(KernelOnGrid::Identity),
            Some(samples) => Ok(KernelOnGrid::Fft(ConvolutionPlan::new(grid, &samples))),
        }
    }
}

fn min_image(x: f64, length: f64) -> f64 {
    x - length * (x / length).round()
}

/// A kernel bound to a grid: either the identity (Dirac) or an FFT circular
/// convolution with precomputed kernel transform.
pub enum KernelOnGrid {
    Identity,
    Fft(ConvolutionPlan),
}

impl KernelOnGrid {
    /// K ⋆ data over the periodic grid (cell-indexed scalar field).
    pub fn convolve(&self, data: &[f64]) -> Vec<f64> {
        match self {
            KernelOnGrid::Identity => data.to_vec(),
            KernelOnGrid::Fft(plan) => plan.convolve(data),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, KernelOnGrid::Identity)
    }
}

impl fmt::Debug for KernelOnGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelOnGrid::Identity => write!(f, "KernelOnGrid::Identity"),
            KernelOnGrid::Fft(p) => write!(f, "KernelOnGrid::Fft({}x{})", p.nx, p.ny),
        }
    }
}

/// FFT plans plus the kernel transform, prescaled so that the inverse pass
/// needs no extra normalization: K̂ stores DFT(K)·ΔV/(nx·ny).
pub struct ConvolutionPlan {
    nx: usize,
    ny: usize,
    fft_x_fwd: Arc<dyn Fft<f64>>,
    fft_x_inv: Arc<dyn Fft<f64>>,
    fft_y: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    kernel_hat: Vec<Complex<f64>>,
}

impl ConvolutionPlan {
    fn new(grid: &SpatialGrid, kernel_samples: &[f64]) -> Self {
        let (nx, ny) = (grid.n_axis(0), grid.n_axis(1));
        let mut planner = FftPlanner::new();
        let fft_x_fwd = planner.plan_fft_forward(nx);
        let fft_x_inv = planner.plan_fft_inverse(nx);
        let fft_y = (ny > 1).then(|| (planner.plan_fft_forward(ny), planner.plan_fft_inverse(ny)));
        let mut kernel_hat: Vec<Complex<f64>> =
            kernel_samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft2(&mut kernel_hat, nx, ny, &fft_x_fwd, fft_y.as_ref().map(|(f, _)| f));
        let scale = grid.cell_volume() / (nx * ny) as f64;
        for v in &mut kernel_hat {
            *v *= scale;
        }
        ConvolutionPlan { nx, ny, fft_x_fwd, fft_x_inv, fft_y, kernel_hat }
    }

    fn convolve(&self, data: &[f64]) -> Vec<f64> {
        assert_eq!(data.len(), self.nx * self.ny, "data does not match the plan's grid");
        let mut buf: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft2(&mut buf, self.nx, self.ny, &self.fft_x_fwd, self.fft_y.as_ref().map(|(f, _)| f));
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        fft2(&mut buf, self.nx, self.ny, &self.fft_x_inv, self.fft_y.as_ref().map(|(_, i)| i));
        buf.iter().map(|v| v.re).collect()
    }
}

/// In-place 2-d DFT of a row-major nx × ny buffer (cell = ix·ny + iy): rows
/// along y are contiguous, columns along x are gathered through a scratch
/// vector. ny = 1 degenerates to a single x transform.
fn fft2(
    buf: &mut [Complex<f64>],
    nx: usize,
    ny: usize,
    fft_x: &Arc<dyn Fft<f64>>,
    fft_y: Option<&Arc<dyn Fft<f64>>>,
) {
    if let Some(fy) = fft_y {
        for row in buf.chunks_exact_mut(ny) {
            fy.process(row);
        }
    }
    let mut col = vec![Complex::default(); nx];
    for iy in 0..ny {
        for (ix, c) in col.iter_mut().enumerate() {
            *c = buf[ix * ny + iy];
        }
        fft_x.process(&mut col);
        for (ix, c) in col.iter().enumerate() {
            buf[ix * ny + iy] = *c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_convolve_1d(grid: &SpatialGrid, kernel: &[f64], data: &[f64]) -> Vec<f64> {
        let n = grid.n_axis(0);
        let mut out = vec![0.0; n];
        for i in 0..n {
            for l in 0..n {
                out[i] += kernel[(i + n - l) % n] * data[l];
            }
            out[i] *= grid.cell_volume();
        }
        out
    }

    #[test]
    fn validation() {
        assert!(KernelSpec::Dirac.validate().is_ok());
        assert!(KernelSpec::TopHat { radius: 0.0 }.validate().is_err());
        assert!(KernelSpec::Gaussian { width: -1.0 }.validate().is_err());
        assert_eq!(KernelSpec::TopHat { radius: 0.2 }.interaction_radius(), Some(0.2));
        assert_eq!(KernelSpec::Dirac.interaction_radius(), None);
    }

    #[test]
    fn samples_are_normalized() {
        let grid = SpatialGrid::line(64, 2.0).unwrap();
        for spec in [KernelSpec::TopHat { radius: 0.3 }, KernelSpec::Gaussian { width: 0.15 }] {
            let k = spec.sample(&grid).unwrap().unwrap();
            let total: f64 = k.iter().sum::<f64>() * grid.cell_volume();
            assert!((total - 1.0).abs() < 1e-12, "{spec:?}");
            assert!(k.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn top_hat_counts_min_image_cells() {
        let grid = SpatialGrid::line(8, 1.0).unwrap();
        let k = KernelSpec::TopHat { radius: 0.26 }.sample(&grid).unwrap().unwrap();
        // cells at displacement 0, ±1/8, ±1/4 are inside; ±3/8 are not
        let hits: Vec<usize> = (0..8).filter(|&i| k[i] > 0.0).collect();
        assert_eq!(hits, vec![0, 1, 2, 6, 7]);
    }

    #[test]
    fn dirac_convolution_is_identity() {
        let grid = SpatialGrid::line(16, 1.0).unwrap();
        let plan = KernelSpec::Dirac.on_grid(&grid).unwrap();
        assert!(plan.is_identity());
        let data: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        assert_eq!(plan.convolve(&data), data);
    }

    #[test]
    fn convolving_constant_preserves_it() {
        let grid = SpatialGrid::line(32, 1.0).unwrap();
        let plan = KernelSpec::TopHat { radius: 0.2 }.on_grid(&grid).unwrap();
        let out = plan.convolve(&vec![3.0; 32]);
        for v in out {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spike_reproduces_kernel_shape() {
        let grid = SpatialGrid::line(32, 1.0).unwrap();
        let spec = KernelSpec::Gaussian { width: 0.07 };
        let samples = spec.sample(&grid).unwrap().unwrap();
        let plan = spec.on_grid(&grid).unwrap();
        // unit-mass spike at cell 5
        let mut data = vec![0.0; 32];
        data[5] = 1.0 / grid.cell_volume();
        let out = plan.convolve(&data);
        for i in 0..32 {
            assert!((out[i] - samples[(i + 32 - 5) % 32]).abs() < 1e-10, "cell {i}");
        }
    }

    #[test]
    fn fft_matches_direct_convolution_1d() {
        let grid = SpatialGrid::line(32, 2.0).unwrap();
        let spec = KernelSpec::TopHat { radius: 0.35 };
        let samples = spec.sample(&grid).unwrap().unwrap();
        let plan = spec.on_grid(&grid).unwrap();
        let data: Vec<f64> = (0..32).map(|i| 1.0 + (0.37 * i as f64).sin() * (i as f64 * 0.11).cos()).collect();
        let fftd = plan.convolve(&data);
        let direct = direct_convolve_1d(&grid, &samples, &data);
        for (a, b) in fftd.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_direct_convolution_2d() {
        let grid = SpatialGrid::plane(8, 16, 1.0, 2.0).unwrap();
        let spec = KernelSpec::Gaussian { width: 0.2 };
        let samples = spec.sample(&grid).unwrap().unwrap();
        let plan = spec.on_grid(&grid).unwrap();
        let n = grid.n_cells();
        let data: Vec<f64> = (0..n).map(|i| (0.13 * i as f64).sin() + 0.5).collect();
        let fftd = plan.convolve(&data);
        // direct periodic sum over 2-d displacements
        let (nx, ny) = (8usize, 16usize);
        let mut direct = vec![0.0; n];
        for ix in 0..nx {
            for iy in 0..ny {
                let mut acc = 0.0;
                for lx in 0..nx {
                    for ly in 0..ny {
                        let kx = (ix + nx - lx) % nx;
                        let ky = (iy + ny - ly) % ny;
                        acc += samples[kx * ny + ky] * data[lx * ny + ly];
                    }
                }
                direct[ix * ny + iy] = acc * grid.cell_volume();
            }
        }
        for (a, b) in fftd.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
