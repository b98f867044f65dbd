//! Observables over time, exponent fits and random-phase diagnostics.

pub mod fit;
pub mod phases;
pub mod timeseries;

pub use fit::{fit_power_law, fit_subdiffusion, ExponentFit, MIN_FIT_SAMPLES};
pub use phases::{
    functional_fidelity, kolmogorov_survival, ks_uniform, median, phase_correlation_check, phase_uniformity_test,
    randomized_phase_check, CorrelationReport, FunctionalFidelity, KsOutcome, RandomizedPhaseReport,
    DEFAULT_POPULATION_CUTOFF, DEFAULT_RELATIVE_F_FLOOR,
};
pub use timeseries::{log_spaced_times, SeriesMetadata, TimeSeries, ENERGY_CONVENTION};
