use std::f64::consts::PI;

use num_complex::Complex64;

use super::kick::Kick;
use super::{cis_neg, cis_neg_reduced, kinetic_phases, single_period, PeriodPropagator, REDUCED_PHASE_LIMIT};
use crate::error::Result;
use crate::grid::ModeGrid;
use crate::params::{methods, SimulationParams};
use crate::spectral::SpectralTransform;
use crate::wavefunction::WaveFunction;

/// Second-order (Strang) split-step integrator for the kicked GPE.
///
/// Each substep is kinetic(dt/2), nonlinear(dt), kinetic(dt/2). Adjacent
/// kinetic half steps inside a period are fused into one full step, so a
/// substep costs one inverse and one forward FFT on the `2 n_modes` grid.
/// After every nonlinear step the spectrum is projected back onto the window.
#[derive(Debug, Clone)]
pub struct SplitStepGpe {
    substeps: usize,
    /// `g dt / hbar_eff / (2pi)`: multiplies `|u|^2` of the unscaled synthesis.
    nonlinear_rate: f64,
    half_kinetic: Vec<Complex64>,
    /// Full kinetic step with the `1/n_x` FFT normalization folded in.
    full_kinetic_scaled: Vec<Complex64>,
    half_kinetic_scaled: Vec<Complex64>,
    transform: SpectralTransform,
    buffer: Vec<Complex64>,
    kick: Kick,
}

impl SplitStepGpe {
    pub fn new(params: &SimulationParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid()?;
        let substeps = params.substeps()?;
        let dt = 1.0 / substeps as f64;
        Ok(Self::with_substeps(&grid, params.kick_strength, params.coupling, substeps, dt))
    }

    fn with_substeps(grid: &ModeGrid, kick_strength: f64, coupling: f64, substeps: usize, dt: f64) -> Self {
        let transform = SpectralTransform::oversampled(grid.n_modes());
        let n_x = transform.n_x();
        let inv_nx = 1.0 / n_x as f64;
        Self {
            substeps,
            nonlinear_rate: coupling * dt / grid.hbar_eff() / (2.0 * PI),
            half_kinetic: kinetic_phases(grid, 0.5 * dt, 1.0),
            full_kinetic_scaled: kinetic_phases(grid, dt, inv_nx),
            half_kinetic_scaled: kinetic_phases(grid, 0.5 * dt, inv_nx),
            buffer: vec![Complex64::default(); n_x],
            transform,
            kick: Kick::new(grid, kick_strength),
        }
    }

    fn nonlinear_phase(&mut self) {
        let rate = self.nonlinear_rate;
        if rate == 0.0 {
            return;
        }
        let peak = self.buffer.iter().map(|u| u.norm_sqr()).fold(0.0, f64::max);
        if rate * peak <= REDUCED_PHASE_LIMIT {
            for u in self.buffer.iter_mut() {
                *u *= cis_neg_reduced(rate * u.norm_sqr());
            }
        } else {
            for u in self.buffer.iter_mut() {
                *u *= cis_neg(rate * u.norm_sqr());
            }
        }
    }

    /// Free evolution over one period, no kick.
    pub fn free_period(&mut self, amplitudes: &mut [Complex64]) {
        for (c, k) in amplitudes.iter_mut().zip(&self.half_kinetic) {
            *c *= k;
        }
        self.transform.pad_into(amplitudes, &mut self.buffer);
        self.transform.inverse_in_place(&mut self.buffer);
        let half = self.transform.n_modes() / 2;
        let n_x = self.transform.n_x();
        for step in 0..self.substeps {
            self.nonlinear_phase();
            self.transform.forward_in_place(&mut self.buffer);
            if step + 1 == self.substeps {
                self.transform.truncate_from(&self.buffer, amplitudes, 1.0);
                for (c, k) in amplitudes.iter_mut().zip(&self.half_kinetic_scaled) {
                    *c *= k;
                }
            } else {
                let (low, rest) = self.buffer.split_at_mut(half);
                let (gap, high) = rest.split_at_mut(n_x - 2 * half);
                for (b, k) in low.iter_mut().zip(&self.full_kinetic_scaled[..half]) {
                    *b *= k;
                }
                for (b, k) in high.iter_mut().zip(&self.full_kinetic_scaled[half..]) {
                    *b *= k;
                }
                gap.fill(Complex64::default());
                self.transform.inverse_in_place(&mut self.buffer);
            }
        }
    }
}

impl PeriodPropagator for SplitStepGpe {
    fn name(&self) -> &str {
        methods::GPE
    }

    fn advance(&mut self, psi: &mut WaveFunction) -> Result<()> {
        let amplitudes = psi.amplitudes_mut();
        self.free_period(amplitudes);
        self.kick.apply(amplitudes);
        Ok(())
    }
}

/// One unfused Strang substep of length `dt` (no kick).
pub fn gpe_free_substep(psi: &WaveFunction, dt: f64, coupling: f64) -> WaveFunction {
    let mut stepper = SplitStepGpe::with_substeps(psi.grid(), 0.0, coupling, 1, dt);
    let mut out = psi.clone();
    stepper.free_period(out.amplitudes_mut());
    out
}

/// One full GPE period (`1/dt` substeps, then the kick), with the boundary monitor.
pub fn gpe_period(psi: &WaveFunction, params: &SimulationParams) -> Result<WaveFunction> {
    single_period(SplitStepGpe::new(params)?, psi, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n_modes: usize, dt: f64, g: f64, k: f64) -> SimulationParams {
        SimulationParams::new(2.89, k, g, methods::GPE).with_grid(n_modes).with_dt(dt)
    }

    #[test]
    fn plane_wave_modulus_unchanged_without_interaction() {
        let grid = ModeGrid::new(64, 2.89).unwrap();
        let psi = WaveFunction::plane_wave(grid, 7).unwrap();
        let out = gpe_free_substep(&psi, 0.01, 0.0);
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
        assert!((out.kinetic_energy() - psi.kinetic_energy()).abs() < 1e-10);
    }

    #[test]
    fn uniform_density_only_gains_global_phase() {
        let grid = ModeGrid::new(64, 2.89).unwrap();
        let psi = WaveFunction::plane_wave(grid, 0).unwrap();
        let dt = 0.01;
        let g = 10.0;
        let out = gpe_free_substep(&psi, dt, g);
        let expected = Complex64::from_polar(1.0, -g / (2.0 * PI) * dt / 2.89);
        assert!((out.amplitude(0) - expected).norm() < 1e-14);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fused_period_equals_composed_substeps() {
        let grid = ModeGrid::new(64, 2.89).unwrap();
        let psi = WaveFunction::from_modes(
            grid,
            &[(0, Complex64::new(0.6, 0.1)), (2, Complex64::new(0.1, -0.5)), (-3, Complex64::new(0.3, 0.3))],
        )
        .unwrap();
        let p = params(64, 0.1, 7.0, 0.0);
        let mut composed = psi.clone();
        for _ in 0..10 {
            composed = gpe_free_substep(&composed, 0.1, 7.0);
        }
        let fused = gpe_period(&psi, &p).unwrap();
        for (a, b) in composed.amplitudes().iter().zip(fused.amplitudes()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn free_interacting_plane_wave_then_kick_gains_half_k_squared() {
        let grid = ModeGrid::new(128, 2.89).unwrap();
        let psi = WaveFunction::plane_wave(grid, 2).unwrap();
        let p = params(128, 1e-2, 10.0, 12.0);
        let out = gpe_period(&psi, &p).unwrap();
        let gain = out.kinetic_energy() - psi.kinetic_energy();
        assert!((gain - 72.0).abs() < 0.01 * 72.0, "gain {gain}");
    }
}
