//! Spectral simulation of the mean-field interacting quantum kicked rotor.
//!
//! The condensate lives on a ring `x in [0, 2pi)` and is stored as momentum
//! amplitudes on the ladder `p = n hbar_eff`. Each kick period is advanced by
//! a [`propagators::PeriodPropagator`] chosen by name:
//!
//! - `GPE`: second-order split-step integration of the full Gross-Pitaevskii equation,
//! - `LMA`: local momentum approximation (diagonal interaction),
//! - `PAA`: phase-averaging approximation (random-phase magnitude of the interaction),
//! - `NONINTERACTING`: the linear kicked rotor.
//!
//! [`runner`] averages trajectories over initial momenta and sweeps parameters;
//! [`analysis`] fits subdiffusion exponents and runs the phase-statistics
//! diagnostics.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod params;
pub mod propagators;
pub mod runner;
pub mod spectral;
pub mod units;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::ModeGrid;
pub use params::{methods, SimulationParams};
pub use propagators::{PeriodPropagator, PropagatorRegistry};
pub use wavefunction::{kinetic_energy, make_plane_wave, WaveFunction};

/// Re-exported so downstream crates name the same complex type.
pub use num_complex::Complex64;
