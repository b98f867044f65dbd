use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::kick::Kick;
use super::{single_period, PeriodPropagator};
use crate::error::Result;
use crate::grid::ModeGrid;
use crate::params::{methods, SimulationParams};
use crate::wavefunction::WaveFunction;

/// Local momentum approximation: the interaction is replaced by the diagonal
/// term `gamma |c(p)|^2 c(p) / (2pi)`, so each mode only rotates between kicks.
#[derive(Debug, Clone)]
pub struct LocalMomentum {
    grid: ModeGrid,
    /// `g gamma / (2pi hbar_eff)`
    interaction_rate: f64,
    kick: Kick,
}

impl LocalMomentum {
    pub fn new(params: &SimulationParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid()?;
        Ok(Self {
            grid,
            interaction_rate: params.coupling * params.gamma / (2.0 * PI * grid.hbar_eff()),
            kick: Kick::new(&grid, params.kick_strength),
        })
    }

    /// Exact between-kick evolution: every `|c(p)|` is a constant of motion.
    pub fn free_period(&self, amplitudes: &mut [Complex64]) {
        let hbar = self.grid.hbar_eff();
        for (i, c) in amplitudes.iter_mut().enumerate() {
            let n = self.grid.mode(i) as f64;
            let phase = 0.5 * n * n * hbar + self.interaction_rate * c.norm_sqr();
            *c *= Complex64::from_polar(1.0, -phase.rem_euclid(TAU));
        }
    }
}

impl PeriodPropagator for LocalMomentum {
    fn name(&self) -> &str {
        methods::LMA
    }

    fn advance(&mut self, psi: &mut WaveFunction) -> Result<()> {
        let amplitudes = psi.amplitudes_mut();
        self.free_period(amplitudes);
        self.kick.apply(amplitudes);
        Ok(())
    }
}

/// One LMA period with the boundary monitor.
pub fn lma_period(psi: &WaveFunction, params: &SimulationParams) -> Result<WaveFunction> {
    single_period(LocalMomentum::new(params)?, psi, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_phase_advance() {
        let p = SimulationParams::new(2.89, 0.0, 10.0, methods::LMA).with_grid(32);
        let grid = p.grid().unwrap();
        let lma = LocalMomentum::new(&p).unwrap();
        let mut psi = WaveFunction::plane_wave(grid, 3).unwrap();
        lma.free_period(psi.amplitudes_mut());
        let expected = -(9.0 * 2.89 * 2.89 / 2.0 + 10.0 / (2.0 * PI)) / 2.89;
        let c = psi.amplitude(3);
        assert!((c - Complex64::from_polar(1.0, expected)).norm() < 1e-13);
    }
}
