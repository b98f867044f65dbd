//! Momentum-space interaction functionals.
//!
//! The exact cubic term is `F(p) = (2pi)^{-1} sum_{p1,p2} conj(c(p1)) c(p2) c(p+p1-p2)`,
//! i.e. the momentum amplitude of `|psi|^2 psi`. It is evaluated through the
//! oversampled real-space grid, where `n_x = 2 n_modes` keeps every aliased
//! image of the cubic spectrum outside the retained window.
//!
//! The phase-averaged magnitude needs `S(p) = sum_{p1,p2} B(p1) B(p2) B(p+p1-p2)`
//! with `B = A^2`. That is the same cubic form evaluated on the real,
//! non-negative spectrum `B` (scaled by `2pi`), so it reuses the FFT route.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::SpectralTransform;
use crate::wavefunction::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalKind {
    Exact,
    Lma,
    Paa,
}

/// Interaction term evaluated for every mode of the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionFunctional {
    /// FFT-ordered, aligned with the state's amplitudes.
    pub values: Vec<Complex64>,
    pub kind: FunctionalKind,
}

impl InteractionFunctional {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Reusable workspace for the cubic functional on one grid size.
#[derive(Debug, Clone)]
pub struct CubicFunctional {
    transform: SpectralTransform,
    buffer: Vec<Complex64>,
}

impl CubicFunctional {
    pub fn new(n_modes: usize) -> Self {
        let transform = SpectralTransform::oversampled(n_modes);
        let n_x = transform.n_x();
        Self { transform, buffer: vec![Complex64::default(); n_x] }
    }

    /// Writes `(2pi)^{-1} sum conj(c1) c2 c3` for each window mode into `out`.
    pub fn evaluate(&mut self, coeffs: &[Complex64], out: &mut [Complex64]) {
        self.transform.pad_into(coeffs, &mut self.buffer);
        self.transform.inverse_in_place(&mut self.buffer);
        for u in self.buffer.iter_mut() {
            *u *= u.norm_sqr();
        }
        self.transform.forward_in_place(&mut self.buffer);
        let scale = 1.0 / (2.0 * PI * self.transform.n_x() as f64);
        self.transform.truncate_from(&self.buffer, out, scale);
    }

    /// `S(p) = sum_{p1,p2} B(p1) B(p2) B(p+p1-p2)` for non-negative `B`.
    pub fn triple_convolution(&mut self, weights: &[f64], out: &mut [f64]) {
        let coeffs: Vec<Complex64> = weights.iter().map(|&b| Complex64::new(b, 0.0)).collect();
        let mut tmp = vec![Complex64::default(); coeffs.len()];
        self.evaluate(&coeffs, &mut tmp);
        let peak = tmp.iter().map(|t| t.re).fold(0.0, f64::max);
        // the exact sum is real and non-negative; anything under the FFT
        // roundoff scale is indistinguishable from zero
        let noise = peak * f64::EPSILON * self.transform.n_x() as f64;
        for (o, t) in out.iter_mut().zip(tmp) {
            *o = if t.re > noise { 2.0 * PI * t.re } else { 0.0 };
        }
    }

    /// `|F_PAA(p)| = (2pi)^{-1} sqrt(4 A(p)^2 + 2 S(p))` from the mode populations `A^2`.
    pub fn paa_magnitudes(&mut self, populations: &[f64], out: &mut [f64]) {
        self.triple_convolution(populations, out);
        for (o, &b) in out.iter_mut().zip(populations) {
            *o = (4.0 * b + 2.0 * *o).sqrt() / (2.0 * PI);
        }
    }
}

/// Exact nonlocal cubic functional via the real-space route.
pub fn compute_f_exact(psi: &WaveFunction) -> InteractionFunctional {
    let n = psi.grid().n_modes();
    let mut values = vec![Complex64::default(); n];
    CubicFunctional::new(n).evaluate(psi.amplitudes(), &mut values);
    InteractionFunctional { values, kind: FunctionalKind::Exact }
}

/// Local-momentum functional `gamma |c(p)|^2 c(p) / (2pi)`.
pub fn compute_f_lma(psi: &WaveFunction, gamma: f64) -> InteractionFunctional {
    let values = psi.amplitudes().iter().map(|c| c * (gamma * c.norm_sqr() / (2.0 * PI))).collect();
    InteractionFunctional { values, kind: FunctionalKind::Lma }
}

/// Magnitudes of the phase-averaged functional for `psi`.
pub fn paa_magnitudes(psi: &WaveFunction) -> Vec<f64> {
    let n = psi.grid().n_modes();
    let mut out = vec![0.0; n];
    CubicFunctional::new(n).paa_magnitudes(&psi.populations(), &mut out);
    out
}

/// Phase-averaged functional: random-phase magnitude carrying the phase of `c(p)`.
///
/// Modes with exactly zero amplitude have no phase; they get phase 0.
pub fn compute_f_paa(psi: &WaveFunction) -> InteractionFunctional {
    let magnitudes = paa_magnitudes(psi);
    let values = psi
        .amplitudes()
        .iter()
        .zip(magnitudes)
        .map(|(c, m)| {
            let a = c.norm();
            if a > 0.0 {
                c * (m / a)
            } else {
                Complex64::new(m, 0.0)
            }
        })
        .collect();
    InteractionFunctional { values, kind: FunctionalKind::Paa }
}
