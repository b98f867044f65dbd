//! TOML run configuration.
//!
//! The top level mirrors the simulation parameters; optional tables configure
//! each subcommand. Unknown keys are rejected everywhere.
//!
//! ```toml
//! method = "GPE"
//! K = 12.0
//! g = 10.0
//! hbar_eff = 2.89
//!
//! [ensemble]
//! initial_momenta = [1, 2, 3]
//! ```

use std::path::{Path, PathBuf};

use kickrotor_core::analysis::{log_spaced_times, DEFAULT_POPULATION_CUTOFF, DEFAULT_RELATIVE_F_FLOOR};
use kickrotor_core::params::{
    substeps_per_period, DEFAULT_BOUNDARY_THRESHOLD, DEFAULT_DT, DEFAULT_GAMMA, DEFAULT_N_KICKS, DEFAULT_N_MODES,
};
use kickrotor_core::runner::{default_initial_momenta, EnsembleSpec, DEFAULT_BIN_WIDTH, DEFAULT_POINTS_PER_DECADE};
use kickrotor_core::{methods, Error, PropagatorRegistry, SimulationParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Fit window used when the run reaches the asymptotic regime.
pub const ASYMPTOTIC_FIT_WINDOW: (u64, u64) = (10_000, 100_000);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: String,
    #[serde(rename = "K", alias = "kick_strength")]
    pub kick_strength: f64,
    #[serde(rename = "g", alias = "coupling")]
    pub coupling: f64,
    pub hbar_eff: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_n_kicks")]
    pub n_kicks: u64,
    #[serde(default = "default_threshold")]
    pub boundary_threshold: f64,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub diagnose: DiagnoseSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "default_initial_momenta")]
    pub initial_momenta: Vec<i64>,
    #[serde(default)]
    pub seed: u64,
    /// Explicit sampling kicks; log-spaced when absent.
    #[serde(default)]
    pub record_times: Option<Vec<u64>>,
    #[serde(default = "default_points_per_decade")]
    pub points_per_decade: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub g_values: Vec<f64>,
    #[serde(default, rename = "K_values", alias = "k_values")]
    pub k_values: Vec<f64>,
    #[serde(default = "default_sweep_methods")]
    pub methods: Vec<String>,
    #[serde(default)]
    pub fit_window: Option<(u64, u64)>,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    /// Kicks applied before the state is analysed.
    #[serde(default = "default_diagnose_kicks")]
    pub kicks: u64,
    /// Members whose phases are tested; defaults to the ensemble members.
    #[serde(default)]
    pub initial_momenta: Option<Vec<i64>>,
    #[serde(default = "default_draws")]
    pub n_draws: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_population_cutoff")]
    pub population_cutoff: f64,
    #[serde(default = "default_relative_floor")]
    pub relative_floor: f64,
    /// Draws for the correlation-identity check on the first member; 0 skips it.
    #[serde(default)]
    pub correlation_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    #[serde(default = "default_dt_values")]
    pub dt_values: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub initial_momenta: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn default_n_modes() -> usize {
    DEFAULT_N_MODES
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_n_kicks() -> u64 {
    DEFAULT_N_KICKS
}
fn default_threshold() -> f64 {
    DEFAULT_BOUNDARY_THRESHOLD
}
fn default_points_per_decade() -> usize {
    DEFAULT_POINTS_PER_DECADE
}
fn default_sweep_methods() -> Vec<String> {
    [methods::GPE, methods::PAA, methods::LMA].iter().map(|m| m.to_string()).collect()
}
fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH
}
fn default_diagnose_kicks() -> u64 {
    200
}
fn default_draws() -> usize {
    100
}
fn default_population_cutoff() -> f64 {
    DEFAULT_POPULATION_CUTOFF
}
fn default_relative_floor() -> f64 {
    DEFAULT_RELATIVE_F_FLOOR
}
fn default_dt_values() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}
fn default_horizon() -> u64 {
    100
}
fn default_directory() -> PathBuf {
    PathBuf::from(".")
}
fn default_prefix() -> String {
    "kickrotor".to_string()
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            initial_momenta: default_initial_momenta(),
            seed: 0,
            record_times: None,
            points_per_decade: DEFAULT_POINTS_PER_DECADE,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            g_values: Vec::new(),
            k_values: Vec::new(),
            methods: default_sweep_methods(),
            fit_window: None,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

impl Default for DiagnoseSection {
    fn default() -> Self {
        Self {
            kicks: default_diagnose_kicks(),
            initial_momenta: None,
            n_draws: default_draws(),
            seed: 0,
            population_cutoff: DEFAULT_POPULATION_CUTOFF,
            relative_floor: DEFAULT_RELATIVE_F_FLOOR,
            correlation_draws: 0,
        }
    }
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self { dt_values: default_dt_values(), horizon: default_horizon(), initial_momenta: None }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_directory(), prefix: default_prefix(), formats: default_formats() }
    }
}

/// Config key under which a core parameter appears.
fn config_key(field: &str) -> &str {
    match field {
        "kick_strength" => "K",
        "coupling" => "g",
        other => other,
    }
}

fn field_error(section: &str, err: Error) -> CliError {
    match err {
        Error::InvalidParameter { field, reason } => {
            let key = config_key(field);
            let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            CliError::Validation(format!("invalid config field `{path}`: {reason}"))
        }
        other => CliError::Validation(format!("invalid config: {other}")),
    }
}

fn reject(path: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("invalid config field `{path}`: {reason}"))
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("malformed config: {e}")))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

impl RunConfig {
    /// Configuration with every optional value at its default.
    pub fn minimal(method: &str, kick_strength: f64, coupling: f64, hbar_eff: f64) -> Self {
        Self {
            method: method.to_string(),
            kick_strength,
            coupling,
            hbar_eff,
            gamma: DEFAULT_GAMMA,
            n_modes: DEFAULT_N_MODES,
            dt: DEFAULT_DT,
            n_kicks: DEFAULT_N_KICKS,
            boundary_threshold: DEFAULT_BOUNDARY_THRESHOLD,
            ensemble: EnsembleSection::default(),
            sweep: SweepSection::default(),
            diagnose: DiagnoseSection::default(),
            convergence: ConvergenceSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn params(&self) -> SimulationParams {
        SimulationParams {
            hbar_eff: self.hbar_eff,
            kick_strength: self.kick_strength,
            coupling: self.coupling,
            gamma: self.gamma,
            n_modes: self.n_modes,
            dt: self.dt,
            n_kicks: self.n_kicks,
            method: self.method.clone(),
            boundary_threshold: self.boundary_threshold,
        }
    }

    pub fn record_times(&self) -> Vec<u64> {
        match &self.ensemble.record_times {
            Some(times) => times.clone(),
            None => log_spaced_times(self.n_kicks, self.ensemble.points_per_decade),
        }
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            initial_momenta: self.ensemble.initial_momenta.clone(),
            seed: self.ensemble.seed,
            params: self.params(),
            record_times: self.record_times(),
        }
    }

    /// The configured fit window, or `[10^4, 10^5]` for runs that reach it and
    /// the last two decades of the run otherwise.
    pub fn fit_window(&self) -> (u64, u64) {
        if let Some(w) = self.sweep.fit_window {
            return w;
        }
        if self.n_kicks >= ASYMPTOTIC_FIT_WINDOW.1 {
            ASYMPTOTIC_FIT_WINDOW
        } else {
            ((self.n_kicks / 100).max(1), self.n_kicks)
        }
    }

    pub fn diagnose_members(&self) -> Vec<i64> {
        self.diagnose.initial_momenta.clone().unwrap_or_else(|| self.ensemble.initial_momenta.clone())
    }

    pub fn convergence_members(&self) -> Vec<i64> {
        self.convergence.initial_momenta.clone().unwrap_or_else(|| self.ensemble.initial_momenta.clone())
    }

    /// Re-checks every constraint of the inner parameter types.
    pub fn validate(&self) -> CliResult<()> {
        let params = self.params();
        params.validate().map_err(|e| field_error("", e))?;
        let registry = PropagatorRegistry::builtin();
        if !registry.contains(&self.method) {
            return Err(reject("method", format!("unknown method `{}`", self.method)));
        }
        if self.ensemble.points_per_decade == 0 {
            return Err(reject("ensemble.points_per_decade", "must be positive"));
        }
        self.ensemble_spec().validate().map_err(|e| field_error("ensemble", e))?;

        for v in self.sweep.g_values.iter().chain(&self.sweep.k_values) {
            if !(v.is_finite() && *v > 0.0) {
                return Err(reject("sweep", format!("g and K values must be positive, got {v}")));
            }
        }
        for m in &self.sweep.methods {
            if !registry.contains(m) {
                return Err(reject("sweep.methods", format!("unknown method `{m}`")));
            }
        }
        if let Some((lo, hi)) = self.sweep.fit_window {
            if lo == 0 || lo >= hi || hi > self.n_kicks {
                return Err(reject("sweep.fit_window", format!("need 0 < t_min < t_max <= n_kicks, got [{lo}, {hi}]")));
            }
        }
        if !(self.sweep.bin_width.is_finite() && self.sweep.bin_width > 0.0) {
            return Err(reject("sweep.bin_width", "must be positive"));
        }

        let half = (self.n_modes / 2) as i64;
        let on_grid = |path: &str, members: &[i64]| -> CliResult<()> {
            if members.is_empty() {
                return Err(reject(path, "must not be empty"));
            }
            match members.iter().find(|n| n.abs() >= half) {
                Some(n) => Err(reject(path, format!("{n} lies outside |n| < {half}"))),
                None => Ok(()),
            }
        };
        if self.diagnose.kicks == 0 {
            return Err(reject("diagnose.kicks", "must be positive"));
        }
        if self.diagnose.n_draws == 0 {
            return Err(reject("diagnose.n_draws", "must be positive"));
        }
        if !(self.diagnose.population_cutoff >= 0.0) {
            return Err(reject("diagnose.population_cutoff", "must be non-negative"));
        }
        if !(self.diagnose.relative_floor >= 0.0 && self.diagnose.relative_floor < 1.0) {
            return Err(reject("diagnose.relative_floor", "must lie in [0, 1)"));
        }
        on_grid("diagnose.initial_momenta", &self.diagnose_members())?;

        if self.convergence.dt_values.is_empty() {
            return Err(reject("convergence.dt_values", "must not be empty"));
        }
        for &dt in &self.convergence.dt_values {
            substeps_per_period(dt).map_err(|e| field_error("convergence", e))?;
        }
        if self.convergence.horizon == 0 {
            return Err(reject("convergence.horizon", "must be positive"));
        }
        on_grid("convergence.initial_momenta", &self.convergence_members())?;

        if self.output.prefix.is_empty() || self.output.prefix.contains(['/', '\\']) {
            return Err(reject("output.prefix", "must be a non-empty file name"));
        }
        if self.output.formats.is_empty() {
            return Err(reject("output.formats", "must name at least one format"));
        }
        Ok(())
    }
}
