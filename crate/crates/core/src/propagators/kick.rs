use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::ModeGrid;
use crate::spectral::SpectralTransform;
use crate::wavefunction::WaveFunction;

/// The delta kick `e^{-i K cos(x) / hbar_eff}` applied on the oversampled grid.
#[derive(Debug, Clone)]
pub struct Kick {
    phases: Vec<Complex64>,
    transform: SpectralTransform,
    buffer: Vec<Complex64>,
    identity: bool,
}

impl Kick {
    pub fn new(grid: &ModeGrid, kick_strength: f64) -> Self {
        let transform = SpectralTransform::oversampled(grid.n_modes());
        let n_x = transform.n_x();
        let z = kick_strength / grid.hbar_eff();
        let phases = (0..n_x)
            .map(|j| {
                let x = 2.0 * PI * j as f64 / n_x as f64;
                let (s, c) = (z * x.cos()).sin_cos();
                Complex64::new(c, -s)
            })
            .collect();
        Self { phases, transform, buffer: vec![Complex64::default(); n_x], identity: kick_strength == 0.0 }
    }

    /// Kicks the momentum amplitudes in place; modes pushed beyond the window are dropped.
    pub fn apply(&mut self, amplitudes: &mut [Complex64]) {
        if self.identity {
            return;
        }
        self.transform.pad_into(amplitudes, &mut self.buffer);
        self.transform.inverse_in_place(&mut self.buffer);
        for (b, ph) in self.buffer.iter_mut().zip(&self.phases) {
            *b *= ph;
        }
        self.transform.forward_in_place(&mut self.buffer);
        let scale = 1.0 / self.transform.n_x() as f64;
        self.transform.truncate_from(&self.buffer, amplitudes, scale);
    }
}

/// Returns `psi` after one kick of strength `kick_strength`.
pub fn apply_kick(psi: &WaveFunction, kick_strength: f64) -> WaveFunction {
    let mut out = psi.clone();
    Kick::new(psi.grid(), kick_strength).apply(out.amplitudes_mut());
    out
}
