//! One-kick-period evolution operators.
//!
//! Every method implements [`PeriodPropagator`]: free evolution over
//! `(n-1, n)` followed by the kick at `t = n`. Implementations are looked up
//! by name in a [`PropagatorRegistry`], so a run selects its dynamics from
//! configuration alone.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{methods, SimulationParams};
use crate::wavefunction::WaveFunction;

pub mod functional;
mod gpe;
mod kick;
mod linear;
mod lma;
mod paa;

pub use functional::{
    compute_f_exact, compute_f_lma, compute_f_paa, paa_magnitudes, CubicFunctional, FunctionalKind,
    InteractionFunctional,
};
pub use gpe::{gpe_free_substep, gpe_period, SplitStepGpe};
pub use kick::{apply_kick, Kick};
pub use linear::{linear_period, LinearRotor};
pub use lma::{lma_period, LocalMomentum};
pub use paa::{paa_period, PhaseAveraging, PAA_AMPLITUDE_FLOOR};

/// A one-period map `psi(n-1) -> psi(n)` (free evolution, then kick).
///
/// Implementations own their FFT plans and scratch buffers, so a single
/// instance drives one trajectory at a time.
pub trait PeriodPropagator: Send {
    fn name(&self) -> &str;

    /// Advances `psi` in place by one kick period.
    fn advance(&mut self, psi: &mut WaveFunction) -> Result<()>;
}

type Factory = dyn Fn(&SimulationParams) -> Result<Box<dyn PeriodPropagator>> + Send + Sync;

/// Name -> constructor table for period propagators.
#[derive(Clone)]
pub struct PropagatorRegistry {
    factories: BTreeMap<String, Arc<Factory>>,
}

impl std::fmt::Debug for PropagatorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl Default for PropagatorRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PropagatorRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// Registry holding `GPE`, `LMA`, `PAA` and `NONINTERACTING`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(methods::GPE, |p| Ok(Box::new(SplitStepGpe::new(p)?)));
        r.register(methods::LMA, |p| Ok(Box::new(LocalMomentum::new(p)?)));
        r.register(methods::PAA, |p| Ok(Box::new(PhaseAveraging::new(p)?)));
        r.register(methods::NONINTERACTING, |p| Ok(Box::new(LinearRotor::new(p)?)));
        r
    }

    /// Adds or replaces a method. Names are case-insensitive.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&SimulationParams) -> Result<Box<dyn PeriodPropagator>> + Send + Sync + 'static,
    {
        self.factories.insert(canonical(name), Arc::new(factory));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(&canonical(name))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    /// Builds the propagator selected by `params.method`.
    pub fn build(&self, params: &SimulationParams) -> Result<Box<dyn PeriodPropagator>> {
        params.validate()?;
        let factory = self
            .factories
            .get(&canonical(&params.method))
            .ok_or_else(|| Error::UnknownMethod(params.method.clone()))?;
        factory(params)
    }
}

fn canonical(name: &str) -> String {
    name.trim().to_ascii_uppercase()
}

/// Advances one period and enforces the truncation monitor.
pub fn step_monitored(
    propagator: &mut dyn PeriodPropagator,
    psi: &mut WaveFunction,
    threshold: f64,
    kick: u64,
) -> Result<()> {
    propagator.advance(psi)?;
    check_boundary(psi, threshold, kick)
}

/// Fails when the outermost 1% of modes holds more than `threshold` population.
pub fn check_boundary(psi: &WaveFunction, threshold: f64, kick: u64) -> Result<()> {
    let population = psi.boundary_population();
    if population > threshold || !population.is_finite() {
        return Err(Error::BoundaryOverflow { kick, population, threshold });
    }
    Ok(())
}

pub(crate) fn single_period(
    mut propagator: impl PeriodPropagator,
    psi: &WaveFunction,
    params: &SimulationParams,
) -> Result<WaveFunction> {
    let mut out = psi.clone();
    step_monitored(&mut propagator, &mut out, params.boundary_threshold, 1)?;
    Ok(out)
}

/// Largest phase handed to [`cis_neg_reduced`]; the two-term reduction by
/// `pi/2` stays exact well beyond this.
pub(crate) const REDUCED_PHASE_LIMIT: f64 = 1e5;

/// `e^{-i theta}` via libm, for arbitrary phases.
#[inline]
pub(crate) fn cis_neg(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, -s)
}

/// Branch-free `e^{-i theta}` for `|theta| <= REDUCED_PHASE_LIMIT`.
///
/// Reduces by `pi/2` (Cody-Waite, fdlibm constants), evaluates the fdlibm
/// sine and cosine kernels on `[-pi/4, pi/4]` and fixes the quadrant with bit
/// operations, so loops over it vectorize.
#[inline(always)]
pub(crate) fn cis_neg_reduced(theta: f64) -> Complex64 {
    const SHIFT: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
    const PIO2_HI: f64 = 1.570_796_326_734_125_6;
    const PIO2_LO: f64 = 6.077_100_506_506_192e-11;
    const S1: f64 = -1.666_666_666_666_663_2e-1;
    const S2: f64 = 8.333_333_333_322_49e-3;
    const S3: f64 = -1.984_126_982_985_795e-4;
    const S4: f64 = 2.755_731_370_707_007e-6;
    const S5: f64 = -2.505_076_025_340_686e-8;
    const S6: f64 = 1.589_690_995_211_55e-10;
    const C1: f64 = 4.166_666_666_666_66e-2;
    const C2: f64 = -1.388_888_888_887_411e-3;
    const C3: f64 = 2.480_158_728_947_673e-5;
    const C4: f64 = -2.755_731_435_139_066e-7;
    const C5: f64 = 2.087_572_321_298_175e-9;
    const C6: f64 = -1.135_964_755_778_819_5e-11;

    let shifted = theta * std::f64::consts::FRAC_2_PI + SHIFT;
    // low mantissa bits hold the quadrant k mod 4
    let quadrant = shifted.to_bits();
    let k = shifted - SHIFT;
    let r = (theta - k * PIO2_HI) - k * PIO2_LO;
    let z = r * r;
    let sin_r = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
    let cos_r = 1.0 - 0.5 * z + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
    let swap = (quadrant & 1).wrapping_neg();
    let (sb, cb) = (sin_r.to_bits(), cos_r.to_bits());
    let s = (sb & !swap) | (cb & swap);
    let c = (cb & !swap) | (sb & swap);
    let s = f64::from_bits(s ^ ((quadrant & 2) << 62));
    let c = f64::from_bits(c ^ (((quadrant + 1) & 2) << 62));
    Complex64::new(c, -s)
}

/// Free-particle phase `e^{-i n^2 hbar_eff tau / 2}` per window index.
pub(crate) fn kinetic_phases(grid: &crate::grid::ModeGrid, tau: f64, scale: f64) -> Vec<Complex64> {
    let hbar = grid.hbar_eff();
    (0..grid.n_modes())
        .map(|i| {
            let n = grid.mode(i) as f64;
            // n^2 * hbar * tau / 2 can reach 1e6 rad; reduce before evaluating
            let phase = (0.5 * n * n * hbar * tau).rem_euclid(std::f64::consts::TAU);
            Complex64::from_polar(scale, -phase)
        })
        .collect()
}
