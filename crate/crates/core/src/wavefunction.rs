use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::ModeGrid;

/// Condensate wave function in the momentum representation.
///
/// `amplitudes[i]` is `psi_hat(n * hbar_eff)` for `n = grid.mode(i)`, with
/// `sum_n |psi_hat|^2 = 1` for physical states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    grid: ModeGrid,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    /// Wraps amplitudes as given (FFT order, no normalization).
    pub fn from_raw(grid: ModeGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_modes() {
            return Err(Error::LengthMismatch { found: amplitudes.len(), expected: grid.n_modes() });
        }
        Ok(Self { grid, amplitudes })
    }

    /// Wraps amplitudes and rescales them to unit norm.
    pub fn normalized(grid: ModeGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut psi = Self::from_raw(grid, amplitudes)?;
        psi.normalize()?;
        Ok(psi)
    }

    /// Builds a normalized state from `(mode, amplitude)` pairs.
    pub fn from_modes(grid: ModeGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut amplitudes = vec![Complex64::default(); grid.n_modes()];
        for &(n, c) in modes {
            amplitudes[grid.index_checked(n)?] += c;
        }
        Self::normalized(grid, amplitudes)
    }

    /// Momentum eigenstate `psi_hat(p) = delta_{p, n0 hbar_eff}`.
    pub fn plane_wave(grid: ModeGrid, n0: i64) -> Result<Self> {
        if n0.abs() >= grid.half() {
            return Err(Error::OffGrid { index: n0, half: grid.half() });
        }
        let mut amplitudes = vec![Complex64::default(); grid.n_modes()];
        amplitudes[grid.index_checked(n0)?] = Complex64::new(1.0, 0.0);
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Amplitude of mode `n`, zero outside the window.
    pub fn amplitude(&self, n: i64) -> Complex64 {
        self.grid.index(n).map_or(Complex64::default(), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("amplitudes", "state has zero or non-finite norm"));
        }
        self.amplitudes.iter_mut().for_each(|c| *c /= norm);
        Ok(())
    }

    /// `<p^2> = sum_n |psi_hat(n)|^2 (n hbar_eff)^2`, without a factor 1/2.
    pub fn kinetic_energy(&self) -> f64 {
        let hbar = self.grid.hbar_eff();
        let sum: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = self.grid.mode(i) as f64;
                c.norm_sqr() * n * n
            })
            .sum();
        sum * hbar * hbar
    }

    /// Mode populations `|psi_hat(n)|^2` in FFT order.
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Total population inside the outermost 1% of modes.
    pub fn boundary_population(&self) -> f64 {
        self.amplitudes.iter().enumerate().filter(|(i, _)| self.grid.is_edge(*i)).map(|(_, c)| c.norm_sqr()).sum()
    }
}

/// `<p^2>` of `psi`.
pub fn kinetic_energy(psi: &WaveFunction) -> f64 {
    psi.kinetic_energy()
}

/// Normalized momentum eigenstate at `n0 * hbar_eff`.
pub fn make_plane_wave(n0: i64, grid: ModeGrid) -> Result<WaveFunction> {
    WaveFunction::plane_wave(grid, n0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ModeGrid {
        ModeGrid::new(64, 2.89).unwrap()
    }

    #[test]
    fn plane_wave_at_origin() {
        let psi = make_plane_wave(0, grid()).unwrap();
        assert_eq!(psi.amplitude(0), Complex64::new(1.0, 0.0));
        assert_eq!(psi.norm_sqr(), 1.0);
        assert_eq!(psi.populations().iter().filter(|&&p| p > 0.0).count(), 1);
    }

    #[test]
    fn plane_wave_energy_is_exact() {
        let g = grid();
        let psi = make_plane_wave(5, g).unwrap();
        assert_eq!(psi.kinetic_energy(), 25.0 * 2.89 * 2.89);
        let psi = make_plane_wave(3, g).unwrap();
        assert!((psi.kinetic_energy() - 75.1689).abs() < 1e-10);
    }

    #[test]
    fn plane_wave_at_window_edge_is_rejected() {
        let g = grid();
        assert!(matches!(make_plane_wave(32, g), Err(Error::OffGrid { index: 32, .. })));
        assert!(make_plane_wave(-32, g).is_err());
        assert!(make_plane_wave(31, g).is_ok());
    }

    #[test]
    fn symmetric_pair_has_unit_energy() {
        let g = grid();
        let one = Complex64::new(1.0, 0.0);
        let psi = WaveFunction::from_modes(g, &[(1, one), (-1, one)]).unwrap();
        assert!((psi.kinetic_energy() - 2.89 * 2.89).abs() < 1e-12);
    }

    #[test]
    fn zero_state_cannot_be_normalized() {
        let g = grid();
        assert!(WaveFunction::normalized(g, vec![Complex64::default(); 64]).is_err());
        assert!(WaveFunction::from_raw(g, vec![Complex64::default(); 10]).is_err());
    }
}
