use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("real-space grid of {n_x} points cannot resolve {n_modes} momentum modes")]
    Aliasing { n_x: usize, n_modes: usize },

    #[error("momentum index {index} lies outside the grid window |n| < {half}")]
    OffGrid { index: i64, half: i64 },

    #[error("amplitude vector has {found} entries, grid expects {expected}")]
    LengthMismatch { found: usize, expected: usize },

    #[error(
        "boundary population {population:.3e} exceeds threshold {threshold:.3e} after kick {kick}; \
         increase n_modes"
    )]
    BoundaryOverflow { kick: u64, population: f64, threshold: f64 },

    #[error("unknown propagation method `{0}`")]
    UnknownMethod(String),

    #[error("fit window [{t_min}, {t_max}] holds {found} samples, at least {required} required")]
    InsufficientSamples { t_min: u64, t_max: u64, found: usize, required: usize },

    #[error("energy {energy} at kick {time} is not positive; cannot take its logarithm")]
    NonPositiveEnergy { time: u64, energy: f64 },

    #[error("only {found} modes pass the amplitude cutoff, at least {required} required")]
    TooFewModes { found: usize, required: usize },

    #[error("time series is malformed: {0}")]
    MalformedSeries(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}
