use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SimulationParams;

/// Observable convention recorded with every series.
pub const ENERGY_CONVENTION: &str = "<p^2> = sum_n |psi_hat(n)|^2 (n hbar_eff)^2, no factor 1/2";

/// Provenance carried alongside every recorded series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetadata {
    pub params: SimulationParams,
    pub seed: u64,
    pub initial_momenta: Vec<i64>,
    pub energy_convention: String,
}

impl SeriesMetadata {
    pub fn new(params: SimulationParams, seed: u64, initial_momenta: Vec<i64>) -> Self {
        Self { params, seed, initial_momenta, energy_convention: ENERGY_CONVENTION.to_string() }
    }
}

/// Kinetic energy sampled at increasing kick indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<u64>,
    pub energies: Vec<f64>,
    pub metadata: SeriesMetadata,
}

impl TimeSeries {
    pub fn new(times: Vec<u64>, energies: Vec<f64>, metadata: SeriesMetadata) -> Result<Self> {
        let series = Self { times, energies, metadata };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.energies.len() {
            return Err(Error::MalformedSeries(format!(
                "{} times but {} energies",
                self.times.len(),
                self.energies.len()
            )));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedSeries("times must be strictly increasing".into()));
        }
        if let Some(e) = self.energies.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::MalformedSeries(format!("energy {e} is not a non-negative number")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(u64, f64)> {
        Some((*self.times.last()?, *self.energies.last()?))
    }

    /// Energy recorded at kick `t`, if sampled.
    pub fn at(&self, t: u64) -> Option<f64> {
        self.times.binary_search(&t).ok().map(|i| self.energies[i])
    }
}

/// Sampling points `0, 1, ..., n_kicks`, roughly uniform in `log t` with
/// `per_decade` points per decade (deduplicated after rounding).
pub fn log_spaced_times(n_kicks: u64, per_decade: usize) -> Vec<u64> {
    let mut times = vec![0u64];
    if n_kicks == 0 {
        return times;
    }
    let per_decade = per_decade.max(1) as f64;
    let decades = (n_kicks as f64).log10();
    let steps = (decades * per_decade).ceil() as usize;
    for k in 0..=steps {
        let t = 10f64.powf(k as f64 / per_decade).round() as u64;
        let t = t.min(n_kicks);
        if t > *times.last().unwrap() {
            times.push(t);
        }
    }
    if *times.last().unwrap() != n_kicks {
        times.push(n_kicks);
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_times_cover_range_monotonically() {
        let t = log_spaced_times(10_000, 30);
        assert_eq!(t[0], 0);
        assert_eq!(t[1], 1);
        assert_eq!(*t.last().unwrap(), 10_000);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        let late = t.iter().filter(|&&x| (1000..=10_000).contains(&x)).count();
        assert!((29..=32).contains(&late), "{late} samples in the last decade");
    }

    #[test]
    fn malformed_series_is_rejected() {
        let meta = SeriesMetadata::new(SimulationParams::default(), 0, vec![1]);
        assert!(TimeSeries::new(vec![1, 2], vec![1.0], meta.clone()).is_err());
        assert!(TimeSeries::new(vec![2, 1], vec![1.0, 1.0], meta.clone()).is_err());
        assert!(TimeSeries::new(vec![1, 2], vec![1.0, -1.0], meta).is_err());
    }
}
