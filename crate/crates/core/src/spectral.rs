//! Momentum/real-space duality on the ring `x in [0, 2pi)`.
//!
//! With `psi(x) = (2pi)^{-1/2} sum_n c_n e^{inx}` sampled at `x_j = 2 pi j / n_x`,
//! the synthesis is an unnormalized inverse DFT scaled by `(2pi)^{-1/2}` and the
//! analysis a forward DFT scaled by `sqrt(2pi) / n_x`. Grids with `n_x > n_modes`
//! zero-pad the spectrum; analysis keeps only the modes inside the window.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::wavefunction::WaveFunction;

/// Cached FFT plans plus scratch space for one `(n_modes, n_x)` pair.
pub struct SpectralTransform {
    n_modes: usize,
    n_x: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform").field("n_modes", &self.n_modes).field("n_x", &self.n_x).finish()
    }
}

impl Clone for SpectralTransform {
    fn clone(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            n_x: self.n_x,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            scratch: vec![Complex64::default(); self.scratch.len()],
        }
    }
}

impl SpectralTransform {
    pub fn new(n_modes: usize, n_x: usize) -> Result<Self> {
        if n_x < n_modes {
            return Err(Error::Aliasing { n_x, n_modes });
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_x);
        let inverse = planner.plan_fft_inverse(n_x);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Ok(Self { n_modes, n_x, forward, inverse, scratch: vec![Complex64::default(); scratch_len] })
    }

    /// The pseudospectral oversampled grid (`n_x = 2 n_modes`) used for the
    /// cubic and kick steps.
    pub fn oversampled(n_modes: usize) -> Self {
        Self::new(n_modes, 2 * n_modes).expect("2*n_modes always resolves n_modes")
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Position in the `n_x` buffer of the spectral coefficient held at
    /// window index `i`.
    #[inline]
    pub fn padded_index(&self, i: usize) -> usize {
        if i < self.n_modes / 2 {
            i
        } else {
            self.n_x - (self.n_modes - i)
        }
    }

    /// Places window coefficients into a zeroed `n_x` buffer (no scaling).
    pub fn pad_into(&self, coeffs: &[Complex64], buffer: &mut [Complex64]) {
        debug_assert_eq!(coeffs.len(), self.n_modes);
        debug_assert_eq!(buffer.len(), self.n_x);
        buffer.fill(Complex64::default());
        let half = self.n_modes / 2;
        buffer[..half].copy_from_slice(&coeffs[..half]);
        buffer[self.n_x - half..].copy_from_slice(&coeffs[half..]);
    }

    /// Copies the window coefficients out of an `n_x` spectral buffer, applying `scale`.
    pub fn truncate_from(&self, buffer: &[Complex64], coeffs: &mut [Complex64], scale: f64) {
        let half = self.n_modes / 2;
        for (c, b) in coeffs[..half].iter_mut().zip(&buffer[..half]) {
            *c = b * scale;
        }
        for (c, b) in coeffs[half..].iter_mut().zip(&buffer[self.n_x - half..]) {
            *c = b * scale;
        }
    }

    /// Raw in-place unnormalized inverse DFT (`sum_k X_k e^{+2 pi i jk/n}`).
    pub fn inverse_in_place(&mut self, buffer: &mut [Complex64]) {
        self.inverse.process_with_scratch(buffer, &mut self.scratch);
    }

    /// Raw in-place unnormalized forward DFT.
    pub fn forward_in_place(&mut self, buffer: &mut [Complex64]) {
        self.forward.process_with_scratch(buffer, &mut self.scratch);
    }

    /// Momentum amplitudes -> real-space samples `psi(x_j)`.
    pub fn synthesize(&mut self, coeffs: &[Complex64], real: &mut [Complex64]) {
        self.pad_into(coeffs, real);
        self.inverse_in_place(real);
        let s = 1.0 / (2.0 * PI).sqrt();
        real.iter_mut().for_each(|z| *z *= s);
    }

    /// Real-space samples -> momentum amplitudes inside the window.
    /// `real` is used as workspace and overwritten.
    pub fn analyze(&mut self, real: &mut [Complex64], coeffs: &mut [Complex64]) {
        self.forward_in_place(real);
        let scale = self.analysis_scale();
        self.truncate_from(real, coeffs, scale);
    }

    /// Factor taking a raw forward DFT to momentum amplitudes.
    pub fn analysis_scale(&self) -> f64 {
        (2.0 * PI).sqrt() / self.n_x as f64
    }
}

/// Samples `psi(x_j) = (2pi)^{-1/2} sum_n psi_hat(n) e^{i n x_j}` on `n_x`
/// equally spaced points of `[0, 2pi)`.
pub fn to_real_space(psi: &WaveFunction, n_x: usize) -> Result<Vec<Complex64>> {
    let n_modes = psi.grid().n_modes();
    let mut transform = SpectralTransform::new(n_modes, n_x)?;
    let mut real = vec![Complex64::default(); n_x];
    transform.synthesize(psi.amplitudes(), &mut real);
    Ok(real)
}

/// Inverse of [`to_real_space`] for band-limited samples; modes outside the
/// window of `template` are discarded.
pub fn from_real_space(real: &[Complex64], template: &WaveFunction) -> Result<WaveFunction> {
    let grid = *template.grid();
    let mut transform = SpectralTransform::new(grid.n_modes(), real.len())?;
    let mut work = real.to_vec();
    let mut coeffs = vec![Complex64::default(); grid.n_modes()];
    transform.analyze(&mut work, &mut coeffs);
    WaveFunction::from_raw(grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ModeGrid;

    #[test]
    fn zero_mode_is_constant() {
        let grid = ModeGrid::new(32, 2.89).unwrap();
        let psi = WaveFunction::plane_wave(grid, 0).unwrap();
        let real = to_real_space(&psi, 64).unwrap();
        let expected = 1.0 / (2.0 * PI).sqrt();
        for z in real {
            assert!((z.re - expected).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn plane_wave_winds_phase() {
        let grid = ModeGrid::new(32, 1.0).unwrap();
        let psi = WaveFunction::plane_wave(grid, 3).unwrap();
        let real = to_real_space(&psi, 64).unwrap();
        let amp = 1.0 / (2.0 * PI).sqrt();
        for (j, z) in real.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 64.0;
            let expected = Complex64::from_polar(amp, 3.0 * x);
            assert!((z - expected).norm() < 1e-14, "j={j}");
        }
    }

    #[test]
    fn negative_mode_uses_conjugate_winding() {
        let grid = ModeGrid::new(16, 1.0).unwrap();
        let psi = WaveFunction::plane_wave(grid, -5).unwrap();
        let real = to_real_space(&psi, 16).unwrap();
        let amp = 1.0 / (2.0 * PI).sqrt();
        let x = 2.0 * PI / 16.0;
        assert!((real[1] - Complex64::from_polar(amp, -5.0 * x)).norm() < 1e-14);
    }

    #[test]
    fn undersampled_grid_is_rejected() {
        let grid = ModeGrid::new(32, 1.0).unwrap();
        let psi = WaveFunction::plane_wave(grid, 0).unwrap();
        assert_eq!(to_real_space(&psi, 16).unwrap_err(), Error::Aliasing { n_x: 16, n_modes: 32 });
    }
}
