use num_complex::Complex64;

use super::kick::Kick;
use super::{kinetic_phases, single_period, PeriodPropagator};
use crate::error::Result;
use crate::params::{methods, SimulationParams};
use crate::wavefunction::WaveFunction;

/// The non-interacting kicked rotor: exact free phase over a period, then the kick.
#[derive(Debug, Clone)]
pub struct LinearRotor {
    free_phase: Vec<Complex64>,
    kick: Kick,
}

impl LinearRotor {
    pub fn new(params: &SimulationParams) -> Result<Self> {
        params.validate()?;
        let grid = params.grid()?;
        Ok(Self { free_phase: kinetic_phases(&grid, 1.0, 1.0), kick: Kick::new(&grid, params.kick_strength) })
    }
}

impl PeriodPropagator for LinearRotor {
    fn name(&self) -> &str {
        methods::NONINTERACTING
    }

    fn advance(&mut self, psi: &mut WaveFunction) -> Result<()> {
        let amplitudes = psi.amplitudes_mut();
        for (c, f) in amplitudes.iter_mut().zip(&self.free_phase) {
            *c *= f;
        }
        self.kick.apply(amplitudes);
        Ok(())
    }
}

/// One period of the standard linear kicked rotor (coupling ignored).
pub fn linear_period(psi: &WaveFunction, params: &SimulationParams) -> Result<WaveFunction> {
    single_period(LinearRotor::new(params)?, psi, params)
}
