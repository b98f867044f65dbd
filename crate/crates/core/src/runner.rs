//! Trajectories, ensemble averages over initial momenta, parameter sweeps and
//! time-step convergence studies.
//!
//! Trajectories are independent and run in parallel; every reduction happens
//! in a fixed order so results do not depend on scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::fit::{fit_subdiffusion, ExponentFit};
use crate::analysis::timeseries::{log_spaced_times, SeriesMetadata, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::params::SimulationParams;
use crate::propagators::{step_monitored, PropagatorRegistry};
use crate::wavefunction::WaveFunction;

pub const DEFAULT_POINTS_PER_DECADE: usize = 30;
pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

/// Initial momenta `n0 = 1..=10` (i.e. `p0 in [hbar_eff, 10 hbar_eff]`).
pub fn default_initial_momenta() -> Vec<i64> {
    (1..=10).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub initial_momenta: Vec<i64>,
    pub seed: u64,
    pub params: SimulationParams,
    pub record_times: Vec<u64>,
}

impl EnsembleSpec {
    /// Ten plane waves `n0 = 1..=10`, log-spaced sampling up to `n_kicks`.
    pub fn standard(params: SimulationParams) -> Self {
        let record_times = log_spaced_times(params.n_kicks, DEFAULT_POINTS_PER_DECADE);
        Self { initial_momenta: default_initial_momenta(), seed: 0, params, record_times }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.initial_momenta.is_empty() {
            return Err(invalid("initial_momenta", "must not be empty"));
        }
        let half = (self.params.n_modes / 2) as i64;
        if let Some(n0) = self.initial_momenta.iter().find(|n| n.abs() >= half) {
            return Err(invalid("initial_momenta", format!("{n0} lies outside |n| < {half}")));
        }
        validate_record_times(&self.record_times, self.params.n_kicks)
    }
}

fn validate_record_times(times: &[u64], n_kicks: u64) -> Result<()> {
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("record_times", "must be strictly increasing"));
    }
    if let Some(t) = times.iter().find(|&&t| t > n_kicks) {
        return Err(invalid("record_times", format!("{t} exceeds n_kicks = {n_kicks}")));
    }
    Ok(())
}

/// A trajectory that stopped early keeps what it recorded before the abort.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    pub n0: i64,
    pub series: TimeSeries,
    pub failure: Option<Error>,
}

/// Evolves the plane wave `n0` with the method selected in `params` and
/// records `<p^2>` at `record_times`, stopping at the first failure.
pub fn run_trajectory_partial(
    registry: &PropagatorRegistry,
    n0: i64,
    params: &SimulationParams,
    record_times: &[u64],
    seed: u64,
) -> Result<TrajectoryOutcome> {
    params.validate()?;
    validate_record_times(record_times, params.n_kicks)?;
    let grid = params.grid()?;
    let mut psi = WaveFunction::plane_wave(grid, n0)?;
    let mut propagator = registry.build(params)?;

    let mut times = Vec::with_capacity(record_times.len());
    let mut energies = Vec::with_capacity(record_times.len());
    let mut failure = None;
    let mut kick = 0u64;
    for &t in record_times {
        while kick < t {
            kick += 1;
            if let Err(e) = step_monitored(propagator.as_mut(), &mut psi, params.boundary_threshold, kick) {
                failure = Some(e);
                break;
            }
        }
        if failure.is_some() {
            break;
        }
        times.push(t);
        energies.push(psi.kinetic_energy());
    }
    let metadata = SeriesMetadata::new(params.clone(), seed, vec![n0]);
    Ok(TrajectoryOutcome { n0, series: TimeSeries { times, energies, metadata }, failure })
}

/// Single trajectory with the built-in methods; any abort is an error.
pub fn run_trajectory(n0: i64, params: &SimulationParams, record_times: &[u64]) -> Result<TimeSeries> {
    let outcome = run_trajectory_partial(&PropagatorRegistry::builtin(), n0, params, record_times, 0)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(outcome.series),
    }
}

/// State after `kicks` periods from the plane wave `n0`.
pub fn evolve_state(
    registry: &PropagatorRegistry,
    n0: i64,
    params: &SimulationParams,
    kicks: u64,
) -> Result<WaveFunction> {
    let mut psi = WaveFunction::plane_wave(params.grid()?, n0)?;
    let mut propagator = registry.build(params)?;
    for kick in 1..=kicks {
        step_monitored(propagator.as_mut(), &mut psi, params.boundary_threshold, kick)?;
    }
    Ok(psi)
}

/// States after `kicks` periods for several initial momenta, evolved in parallel.
pub fn evolve_members(
    registry: &PropagatorRegistry,
    initial_momenta: &[i64],
    params: &SimulationParams,
    kicks: u64,
) -> Vec<(i64, Result<WaveFunction>)> {
    initial_momenta.par_iter().map(|&n0| (n0, evolve_state(registry, n0, params, kicks))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Mean over members that completed; `None` when every member failed.
    pub mean: Option<TimeSeries>,
    pub members: Vec<TrajectoryOutcome>,
}

impl EnsembleResult {
    pub fn failures(&self) -> impl Iterator<Item = &TrajectoryOutcome> {
        self.members.iter().filter(|m| m.failure.is_some())
    }

    pub fn is_complete(&self) -> bool {
        self.failures().next().is_none()
    }

    /// The mean, or the first member failure.
    pub fn into_mean(self) -> Result<TimeSeries> {
        if let Some(f) = self.members.iter().find_map(|m| m.failure.clone()) {
            return Err(f);
        }
        self.mean.ok_or_else(|| Error::MalformedSeries("empty ensemble".into()))
    }
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    run_ensemble_with(&PropagatorRegistry::builtin(), spec)
}

/// Runs every member in parallel and averages `<p^2>` over the completed ones.
pub fn run_ensemble_with(registry: &PropagatorRegistry, spec: &EnsembleSpec) -> Result<EnsembleResult> {
    spec.validate()?;
    registry.build(&spec.params)?;
    let members: Vec<TrajectoryOutcome> = spec
        .initial_momenta
        .par_iter()
        .map(|&n0| run_trajectory_partial(registry, n0, &spec.params, &spec.record_times, spec.seed))
        .collect::<Result<_>>()?;

    let complete: Vec<&TimeSeries> = members.iter().filter(|m| m.failure.is_none()).map(|m| &m.series).collect();
    let mean = if complete.is_empty() {
        None
    } else {
        let energies = (0..spec.record_times.len())
            .map(|k| {
                let mut column: Vec<f64> = complete.iter().map(|s| s.energies[k]).collect();
                // sorted summation makes the mean independent of member order
                column.sort_by(f64::total_cmp);
                column.iter().sum::<f64>() / column.len() as f64
            })
            .collect();
        let metadata = SeriesMetadata::new(spec.params.clone(), spec.seed, spec.initial_momenta.clone());
        Some(TimeSeries { times: spec.record_times.clone(), energies, metadata })
    };
    Ok(EnsembleResult { mean, members })
}

/// Fixed-width histogram over `[lower, upper)` with explicit out-of-range counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lower: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(lower: f64, upper: f64, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && upper > lower) {
            return Err(invalid("bin_width", "need a positive width and upper > lower"));
        }
        let bins = ((upper - lower) / bin_width).round() as usize;
        Ok(Self { lower, bin_width, counts: vec![0; bins], underflow: 0, overflow: 0 })
    }

    /// Bins of width 0.05 over `[0, 1]`.
    pub fn for_exponents() -> Self {
        Self::new(0.0, 1.0, DEFAULT_BIN_WIDTH).expect("static bounds")
    }

    pub fn edge(&self, k: usize) -> f64 {
        self.lower + k as f64 * self.bin_width
    }

    pub fn add(&mut self, value: f64) {
        if !(value >= self.lower) {
            self.underflow += 1;
            return;
        }
        // values within 1e-9 bin widths below an edge belong to the upper bin
        // (0.6 / 0.05 evaluates to 11.999...)
        let k = ((value - self.lower) / self.bin_width + 1e-9).floor() as usize;
        match self.counts.get_mut(k) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }

    pub fn from_values(values: &[f64], lower: f64, upper: f64, bin_width: f64) -> Result<Self> {
        let mut h = Self::new(lower, upper, bin_width)?;
        values.iter().for_each(|&v| h.add(v));
        Ok(h)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub coupling: f64,
    pub kick_strength: f64,
    pub method: String,
    pub fit: Option<ExponentFit>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub fit_window: (u64, u64),
    pub entries: Vec<SweepEntry>,
    /// One exponent histogram per method.
    pub histograms: BTreeMap<String, Histogram>,
}

/// Ensemble run and exponent fit for every `(g, K, method)` combination.
/// Failed runs are recorded and the sweep continues.
pub fn sweep_parameters(
    registry: &PropagatorRegistry,
    g_values: &[f64],
    k_values: &[f64],
    methods: &[String],
    base: &EnsembleSpec,
    fit_window: (u64, u64),
    bin_width: f64,
) -> Result<SweepResult> {
    if let Some(v) = g_values.iter().chain(k_values).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(invalid("sweep", format!("g and K values must be positive, got {v}")));
    }
    if fit_window.1 > base.params.n_kicks {
        return Err(invalid("fit_window", "extends beyond n_kicks"));
    }
    for m in methods {
        if !registry.contains(m) {
            return Err(Error::UnknownMethod(m.clone()));
        }
    }
    let mut entries = Vec::new();
    let mut histograms = BTreeMap::new();
    for method in methods {
        histograms.insert(method.to_ascii_uppercase(), Histogram::new(0.0, 1.0, bin_width)?);
    }
    for method in methods {
        for &g in g_values {
            for &k in k_values {
                let mut spec = base.clone();
                spec.params.coupling = g;
                spec.params.kick_strength = k;
                spec.params.method = method.clone();
                let outcome = run_ensemble_with(registry, &spec)
                    .and_then(EnsembleResult::into_mean)
                    .and_then(|mean| fit_subdiffusion(&mean, fit_window));
                let (fit, failure) = match outcome {
                    Ok(fit) => {
                        if let Some(h) = histograms.get_mut(&method.to_ascii_uppercase()) {
                            h.add(fit.alpha);
                        }
                        (Some(fit), None)
                    }
                    Err(e) => (None, Some(e.to_string())),
                };
                entries.push(SweepEntry {
                    coupling: g,
                    kick_strength: k,
                    method: method.to_ascii_uppercase(),
                    fit,
                    failure,
                });
            }
        }
    }
    Ok(SweepResult { fit_window, entries, histograms })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub horizon: u64,
    pub initial_momenta: Vec<i64>,
    pub rows: Vec<ConvergenceRow>,
    /// `|E(dt_k) - E(dt_{k+1})|` for consecutive rows.
    pub differences: Vec<f64>,
    /// `differences[k] / differences[k+1]`.
    pub ratios: Vec<f64>,
}

/// Ensemble-averaged `<p^2>(horizon)` for each time step in `dt_values`.
pub fn convergence_study(
    registry: &PropagatorRegistry,
    params: &SimulationParams,
    dt_values: &[f64],
    horizon: u64,
    initial_momenta: &[i64],
) -> Result<ConvergenceTable> {
    if horizon == 0 {
        return Err(invalid("horizon", "must be positive"));
    }
    let mut rows = Vec::with_capacity(dt_values.len());
    for &dt in dt_values {
        let spec = EnsembleSpec {
            initial_momenta: initial_momenta.to_vec(),
            seed: 0,
            params: params.clone().with_dt(dt).with_kicks(horizon),
            record_times: vec![horizon],
        };
        let mean = run_ensemble_with(registry, &spec)?.into_mean()?;
        rows.push(ConvergenceRow { dt, energy: mean.energies[0] });
    }
    let differences: Vec<f64> = rows.windows(2).map(|w| (w[0].energy - w[1].energy).abs()).collect();
    let ratios = differences.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(ConvergenceTable { horizon, initial_momenta: initial_momenta.to_vec(), rows, differences, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::methods;

    #[test]
    fn histogram_counts_with_exact_edges() {
        let h = Histogram::from_values(&[0.41, 0.44, 0.58], 0.0, 1.0, 0.05).unwrap();
        assert_eq!(h.counts.len(), 20);
        assert_eq!(h.counts[8], 2);
        assert_eq!(h.counts[11], 1);
        assert_eq!(h.total(), 3);
        let h = Histogram::from_values(&[0.6, 0.45, -0.1, 1.0, 1.2], 0.0, 1.0, 0.05).unwrap();
        assert_eq!(h.counts[12], 1);
        assert_eq!(h.counts[9], 1);
        assert_eq!((h.underflow, h.overflow), (1, 2));
    }

    #[test]
    fn empty_sweep_is_empty() {
        let params = SimulationParams::new(2.89, 5.0, 1.0, methods::LMA).with_grid(64).with_kicks(20);
        let spec = EnsembleSpec::standard(params);
        let r = sweep_parameters(
            &PropagatorRegistry::builtin(),
            &[1.0],
            &[],
            &[methods::LMA.to_string()],
            &spec,
            (2, 20),
            DEFAULT_BIN_WIDTH,
        )
        .unwrap();
        assert!(r.entries.is_empty());
        assert_eq!(r.histograms[methods::LMA].total(), 0);
    }

    #[test]
    fn spec_validation_rejects_bad_members_and_times() {
        let params = SimulationParams::default().with_grid(64).with_kicks(10);
        let mut spec = EnsembleSpec::standard(params);
        assert!(spec.validate().is_ok());
        spec.initial_momenta = vec![];
        assert!(spec.validate().is_err());
        spec.initial_momenta = vec![32];
        assert!(spec.validate().is_err());
        spec.initial_momenta = vec![1];
        spec.record_times = vec![0, 5, 11];
        assert!(spec.validate().is_err());
        spec.record_times = vec![0, 5, 5];
        assert!(spec.validate().is_err());
    }
}
