use serde::{Deserialize, Serialize};

use super::timeseries::TimeSeries;
use crate::error::{invalid, Error, Result};

pub const MIN_FIT_SAMPLES: usize = 5;

/// Result of an algebraic fit `<p^2> ~ C t^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub alpha: f64,
    /// Intercept of `ln <p^2>` against `ln t`.
    pub intercept: f64,
    /// Standard error of `alpha` from the residual variance.
    pub stderr: f64,
    pub window: (u64, u64),
    pub n_samples: usize,
}

/// Ordinary least squares of `ln <p^2>` against `ln t` over `t_min <= t <= t_max`.
pub fn fit_subdiffusion(series: &TimeSeries, window: (u64, u64)) -> Result<ExponentFit> {
    fit_power_law(&series.times, &series.energies, window)
}

pub fn fit_power_law(times: &[u64], energies: &[f64], window: (u64, u64)) -> Result<ExponentFit> {
    let (t_min, t_max) = window;
    if t_min == 0 || t_min >= t_max {
        return Err(invalid("window", format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &e) in times.iter().zip(energies) {
        if t < t_min || t > t_max {
            continue;
        }
        if !(e > 0.0) {
            return Err(Error::NonPositiveEnergy { time: t, energy: e });
        }
        xs.push((t as f64).ln());
        ys.push(e.ln());
    }
    let n = xs.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { t_min, t_max, found: n, required: MIN_FIT_SAMPLES });
    }

    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let alpha = sxy / sxx;
    let intercept = y_mean - alpha * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + alpha * x);
            r * r
        })
        .sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(ExponentFit { alpha, intercept, stderr, window, n_samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::timeseries::log_spaced_times;

    fn synthetic(f: impl Fn(f64) -> f64) -> (Vec<u64>, Vec<f64>) {
        let t = log_spaced_times(100_000, 30);
        let e = t.iter().map(|&t| f(t as f64)).collect();
        (t, e)
    }

    #[test]
    fn recovers_exact_power_law() {
        let (t, e) = synthetic(|t| 7.0 * t.sqrt());
        let fit = fit_power_law(&t, &e, (10_000, 100_000)).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-8);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-8);
        assert!(fit.stderr < 1e-8);
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let (t, e) = synthetic(|_| 42.0);
        let fit = fit_power_law(&t, &e, (100, 10_000)).unwrap();
        assert!(fit.alpha.abs() < 1e-8);
    }

    #[test]
    fn window_bounds_are_inclusive() {
        let t: Vec<u64> = (1..=10).collect();
        let e: Vec<f64> = t.iter().map(|&t| t as f64).collect();
        let fit = fit_power_law(&t, &e, (3, 7)).unwrap();
        assert_eq!(fit.n_samples, 5);
        assert!(matches!(fit_power_law(&t, &e, (3, 6)), Err(Error::InsufficientSamples { found: 4, .. })));
    }

    #[test]
    fn non_positive_energy_is_rejected() {
        let t: Vec<u64> = (1..=6).collect();
        let e = vec![1.0, 2.0, 0.0, 4.0, 5.0, 6.0];
        assert!(matches!(fit_power_law(&t, &e, (1, 6)), Err(Error::NonPositiveEnergy { time: 3, .. })));
    }
}
