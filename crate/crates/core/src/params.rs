//! Dimensionless model parameters for a kicked-rotor run.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::ModeGrid;

/// Built-in propagation method names understood by the default registry.
pub mod methods {
    pub const GPE: &str = "GPE";
    pub const LMA: &str = "LMA";
    pub const PAA: &str = "PAA";
    pub const NONINTERACTING: &str = "NONINTERACTING";
}

pub const DEFAULT_N_MODES: usize = 2048;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_N_KICKS: u64 = 10_000;
pub const DEFAULT_BOUNDARY_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_GAMMA: f64 = 1.0;

/// Parameters of the dimensionless kicked Gross-Pitaevskii model.
///
/// Time is measured in kick periods. `dt` is the split-step substep and must
/// tile one period exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub hbar_eff: f64,
    pub kick_strength: f64,
    pub coupling: f64,
    pub gamma: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub n_kicks: u64,
    /// Registry name of the period propagator (`GPE`, `LMA`, `PAA`, `NONINTERACTING`, ...).
    pub method: String,
    pub boundary_threshold: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            hbar_eff: 2.89,
            kick_strength: 12.0,
            coupling: 0.0,
            gamma: DEFAULT_GAMMA,
            n_modes: DEFAULT_N_MODES,
            dt: DEFAULT_DT,
            n_kicks: DEFAULT_N_KICKS,
            method: methods::GPE.to_string(),
            boundary_threshold: DEFAULT_BOUNDARY_THRESHOLD,
        }
    }
}

impl SimulationParams {
    pub fn new(hbar_eff: f64, kick_strength: f64, coupling: f64, method: &str) -> Self {
        Self { hbar_eff, kick_strength, coupling, method: method.to_string(), ..Self::default() }
    }

    pub fn with_method(mut self, method: &str) -> Self {
        self.method = method.to_string();
        self
    }

    pub fn with_grid(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_kicks(mut self, n_kicks: u64) -> Self {
        self.n_kicks = n_kicks;
        self
    }

    /// Checks every numeric constraint. The method name is resolved later by
    /// the propagator registry.
    pub fn validate(&self) -> Result<()> {
        if !(self.hbar_eff.is_finite() && self.hbar_eff > 0.0) {
            return Err(invalid("hbar_eff", format!("must be positive, got {}", self.hbar_eff)));
        }
        if !(self.kick_strength.is_finite() && self.kick_strength >= 0.0) {
            return Err(invalid("kick_strength", format!("must be non-negative, got {}", self.kick_strength)));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(invalid("coupling", format!("must be non-negative, got {}", self.coupling)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("gamma", format!("must be non-negative, got {}", self.gamma)));
        }
        ModeGrid::new(self.n_modes, self.hbar_eff)?;
        substeps_per_period(self.dt)?;
        if self.n_kicks == 0 {
            return Err(invalid("n_kicks", "must be positive"));
        }
        if !(self.boundary_threshold >= 0.0) {
            return Err(invalid(
                "boundary_threshold",
                format!("must be non-negative, got {}", self.boundary_threshold),
            ));
        }
        if self.method.trim().is_empty() {
            return Err(invalid("method", "must name a propagator"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<ModeGrid> {
        ModeGrid::new(self.n_modes, self.hbar_eff)
    }

    pub fn substeps(&self) -> Result<usize> {
        substeps_per_period(self.dt)
    }
}

/// Number of split-step substeps per kick period; `1/dt` must be a positive integer.
pub fn substeps_per_period(dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0 && dt <= 1.0) {
        return Err(invalid("dt", format!("must lie in (0, 1], got {dt}")));
    }
    let inverse = 1.0 / dt;
    let rounded = inverse.round();
    if (inverse - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(invalid("dt", format!("1/dt = {inverse} is not an integer")));
    }
    Ok(rounded as usize)
}
