use std::f64::consts::TAU;

use num_complex::Complex64;

use super::functional::CubicFunctional;
use super::kick::Kick;
use super::{single_period, PeriodPropagator};
use crate::error::Result;
use crate::grid::ModeGrid;
use crate::params::{methods, SimulationParams};
use crate::wavefunction::WaveFunction;

/// Modes with `|c(p)|` below this receive only the kinetic phase; their phase
/// does not feed back into the dynamics.
pub const PAA_AMPLITUDE_FLOOR: f64 = 1e-30;

/// Phase-averaging approximation.
///
/// Between kicks each mode rotates at `(p^2/2 + g |F_PAA(p)| / |c(p)|) / hbar_eff`.
/// Amplitudes are frozen between kicks, so `|F_PAA|` is evaluated once per
/// period from the state right after the previous kick.
#[derive(Debug, Clone)]
pub struct PhaseAveraging {
    grid: ModeGrid,
    coupling: f64,
    functional: CubicFunctional,
    populations: Vec<f64>,
    magnitudes: Vec<f64>,
    kick: Kick,
}

impl PhaseAveraging {
    pub fn new(params: &SimulationParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid()?;
        let n = grid.n_modes();
        Ok(Self {
            grid,
            coupling: params.coupling,
            functional: CubicFunctional::new(n),
            populations: vec![0.0; n],
            magnitudes: vec![0.0; n],
            kick: Kick::new(&grid, params.kick_strength),
        })
    }

    pub fn free_period(&mut self, amplitudes: &mut [Complex64]) {
        let hbar = self.grid.hbar_eff();
        let interacting = self.coupling != 0.0;
        if interacting {
            for (b, c) in self.populations.iter_mut().zip(amplitudes.iter()) {
                *b = c.norm_sqr();
            }
            self.functional.paa_magnitudes(&self.populations, &mut self.magnitudes);
        }
        for (i, c) in amplitudes.iter_mut().enumerate() {
            let n = self.grid.mode(i) as f64;
            let mut phase = 0.5 * n * n * hbar;
            let a = c.norm();
            if interacting && a >= PAA_AMPLITUDE_FLOOR {
                phase += self.coupling * self.magnitudes[i] / a / hbar;
            }
            *c *= Complex64::from_polar(1.0, -phase.rem_euclid(TAU));
        }
    }
}

impl PeriodPropagator for PhaseAveraging {
    fn name(&self) -> &str {
        methods::PAA
    }

    fn advance(&mut self, psi: &mut WaveFunction) -> Result<()> {
        let amplitudes = psi.amplitudes_mut();
        self.free_period(amplitudes);
        self.kick.apply(amplitudes);
        Ok(())
    }
}

/// One PAA period with the boundary monitor.
pub fn paa_period(psi: &WaveFunction, params: &SimulationParams) -> Result<WaveFunction> {
    single_period(PhaseAveraging::new(params)?, psi, params)
}
