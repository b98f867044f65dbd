//! Subcommand implementations. Each writes its artifacts and returns the
//! classified error that decides the exit status.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use kickrotor_core::analysis::{
    fit_subdiffusion, functional_fidelity, phase_correlation_check, phase_uniformity_test, randomized_phase_check,
    ExponentFit, FunctionalFidelity, KsOutcome, RandomizedPhaseReport, SeriesMetadata, TimeSeries,
};
use kickrotor_core::propagators::{compute_f_exact, compute_f_lma, paa_magnitudes};
use kickrotor_core::runner::{
    convergence_study, evolve_members, run_ensemble_with, run_trajectory_partial, sweep_parameters, ConvergenceTable,
    Histogram, SweepEntry,
};
use kickrotor_core::units::{to_dimensionless, DimensionlessParams, PhysicalParams, TransverseConfinement};
use kickrotor_core::{PropagatorRegistry, WaveFunction};
use serde::{Deserialize, Serialize};

use crate::config::{load_config, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{
    format_f64, histogram_csv, read_series, to_json, with_suffix, write_json, write_series, write_text, MemberRecord,
    RunStatus, SeriesDocument, CODE_VERSION,
};
use crate::presets::{base_config, Preset};

/// Modes entering the functional-fidelity comparison.
pub const FIDELITY_POPULATION_FLOOR: f64 = 1e-10;
/// KS p-values above this count as "not rejected".
pub const KS_LEVEL: f64 = 0.01;

/// Options shared by the simulation subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub kicks: Option<u64>,
    pub preset: Option<Preset>,
}

impl RunOptions {
    /// Config file (or preset base), preset, then command-line overrides; validated.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(_)) => base_config(),
            (None, None) => return Err(CliError::Validation("--config is required without --preset".into())),
        };
        if let Some(p) = self.preset {
            p.apply(&mut config);
        }
        if let Some(k) = self.kicks {
            config.n_kicks = k;
        }
        if let Some(dir) = &self.out_dir {
            config.output.directory = dir.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn stem(config: &RunConfig, name: &str) -> PathBuf {
    config.output.directory.join(format!("{}_{name}", config.output.prefix))
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

pub fn simulate(opts: &RunOptions, n0: Option<i64>) -> CliResult<()> {
    let config = opts.resolve()?;
    let n0 = n0.unwrap_or(config.ensemble.initial_momenta[0]);
    let registry = PropagatorRegistry::builtin();
    let outcome =
        run_trajectory_partial(&registry, n0, &config.params(), &config.record_times(), config.ensemble.seed)?;
    let mut doc = SeriesDocument::new(outcome.series, Some(config.clone()));
    if let Some(f) = &outcome.failure {
        doc.status = RunStatus::Aborted;
        doc.failure = Some(f.to_string());
    }
    let written = write_series(&stem(&config, &format!("simulate_n{n0}")), &doc, &config.output.formats)?;
    report(&written);
    match outcome.failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn run_ensemble_document(config: &RunConfig) -> CliResult<(SeriesDocument, Option<kickrotor_core::Error>)> {
    let spec = config.ensemble_spec();
    let result = run_ensemble_with(&PropagatorRegistry::builtin(), &spec)?;
    let members: Vec<MemberRecord> = result
        .members
        .iter()
        .map(|m| MemberRecord {
            n0: m.n0,
            status: if m.failure.is_some() { RunStatus::Aborted } else { RunStatus::Complete },
            failure: m.failure.as_ref().map(|e| e.to_string()),
            series: m.series.clone(),
        })
        .collect();
    let first_failure = result.failures().next().and_then(|m| m.failure.clone());
    let mean = result.mean.unwrap_or_else(|| TimeSeries {
        times: Vec::new(),
        energies: Vec::new(),
        metadata: SeriesMetadata::new(spec.params.clone(), spec.seed, spec.initial_momenta.clone()),
    });
    let mut doc = SeriesDocument::new(mean, Some(config.clone()));
    doc.members = members;
    if let Some(f) = &first_failure {
        let failed = doc.members.iter().filter(|m| m.failure.is_some()).count();
        doc.status = RunStatus::Aborted;
        doc.failure = Some(format!("{failed} member(s) aborted; mean over completed members; first: {f}"));
    }
    Ok((doc, first_failure))
}

pub fn ensemble(opts: &RunOptions) -> CliResult<()> {
    let config = opts.resolve()?;
    let runs: Vec<(RunConfig, String)> = match opts.preset.and_then(Preset::pairs) {
        Some(pairs) => pairs
            .iter()
            .map(|&(g, k)| {
                let mut c = config.clone();
                c.coupling = g;
                c.kick_strength = k;
                (c, format!("ensemble_g{g}_K{k}"))
            })
            .collect(),
        None => vec![(config.clone(), "ensemble".to_string())],
    };
    let mut failure = None;
    for (c, name) in runs {
        c.validate()?;
        let (doc, f) = run_ensemble_document(&c)?;
        report(&write_series(&stem(&c, &name), &doc, &c.output.formats)?);
        failure = failure.or(f);
    }
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub format: String,
    pub code_version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub fit_window: (u64, u64),
    pub entries: Vec<SweepEntry>,
    pub histograms: std::collections::BTreeMap<String, Histogram>,
}

fn sweep_csv(doc: &SweepDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# kickrotor exponent sweep");
    let _ = writeln!(out, "# code_version: {CODE_VERSION}");
    let _ = writeln!(out, "# config: {}", serde_json::to_string(&doc.config).expect("config serializes"));
    let _ = writeln!(out, "# fit_window: [{}, {}]", doc.fit_window.0, doc.fit_window.1);
    out.push_str("g,K,method,alpha,stderr,failure\n");
    for e in &doc.entries {
        let (alpha, stderr) = match &e.fit {
            Some(f) => (format_f64(f.alpha), format_f64(f.stderr)),
            None => (String::new(), String::new()),
        };
        let failure = e.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            out,
            "{},{},{},{alpha},{stderr},{failure}",
            format_f64(e.coupling),
            format_f64(e.kick_strength),
            e.method
        );
    }
    out
}

pub fn sweep(opts: &RunOptions) -> CliResult<()> {
    let config = opts.resolve()?;
    if config.sweep.g_values.is_empty() || config.sweep.k_values.is_empty() {
        return Err(CliError::Validation(
            "invalid config field `sweep`: g_values and K_values must both be non-empty".into(),
        ));
    }
    let fit_window = config.fit_window();
    let result = sweep_parameters(
        &PropagatorRegistry::builtin(),
        &config.sweep.g_values,
        &config.sweep.k_values,
        &config.sweep.methods,
        &config.ensemble_spec(),
        fit_window,
        config.sweep.bin_width,
    )?;
    let doc = SweepDocument {
        format: "kickrotor.sweep".into(),
        code_version: CODE_VERSION.into(),
        config: config.clone(),
        seed: config.ensemble.seed,
        fit_window,
        entries: result.entries,
        histograms: result.histograms,
    };
    let base = stem(&config, "sweep");
    let mut written = Vec::new();
    for format in &config.output.formats {
        match format {
            crate::config::Format::Json => {
                let p = with_suffix(&base, "json");
                write_json(&p, &doc)?;
                written.push(p);
            }
            crate::config::Format::Csv => {
                let p = with_suffix(&base, "csv");
                write_text(&p, &sweep_csv(&doc))?;
                written.push(p);
                for (method, h) in &doc.histograms {
                    let p = with_suffix(&stem(&config, &format!("sweep_hist_{method}")), "csv");
                    write_text(&p, &histogram_csv(h, method, fit_window, Some(&config)))?;
                    written.push(p);
                }
            }
        }
    }
    report(&written);
    let failed: Vec<&SweepEntry> = doc.entries.iter().filter(|e| e.failure.is_some()).collect();
    if let Some(first) = failed.first() {
        return Err(CliError::Runtime(format!(
            "{} sweep entries failed; first (g = {}, K = {}, {}): {}",
            failed.len(),
            first.coupling,
            first.kick_strength,
            first.method,
            first.failure.as_deref().unwrap_or("")
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub format: String,
    pub code_version: String,
    pub input: PathBuf,
    pub fit_window: (u64, u64),
    pub fit: ExponentFit,
    pub source: SeriesMetadata,
}

pub fn fit(input: &Path, window: (u64, u64), output: Option<&Path>) -> CliResult<()> {
    let series = read_series(input)?;
    let fit = fit_subdiffusion(&series, window)?;
    let doc = FitDocument {
        format: "kickrotor.fit".into(),
        code_version: CODE_VERSION.into(),
        input: input.to_path_buf(),
        fit_window: window,
        fit,
        source: series.metadata,
    };
    match output {
        Some(p) => write_json(p, &doc),
        None => {
            print!("{}", to_json(&doc));
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDiagnosis {
    pub n0: i64,
    pub failure: Option<String>,
    pub ks: Option<KsOutcome>,
    pub ks_error: Option<String>,
    pub randomized: Option<RandomizedPhaseReport>,
    pub randomized_error: Option<String>,
}

/// Summary of the random-phase correlation identities on one amplitude profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub n_draws: usize,
    pub total_ff: f64,
    pub total_ff_stderr: f64,
    pub expected_total_ff: f64,
    pub closed_form_total_ff: f64,
    pub max_abs_mode_z: f64,
    pub offdiag_ff_scaled_rms: f64,
    pub offdiag_ff_scaled_max: f64,
    pub max_population: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseDocument {
    pub format: String,
    pub code_version: String,
    pub config: RunConfig,
    pub kicks: u64,
    pub seed: u64,
    pub ks_level: f64,
    pub ks_not_rejected: usize,
    pub members: Vec<MemberDiagnosis>,
    pub fidelity: Option<FunctionalFidelity>,
    pub correlation: Option<CorrelationSummary>,
}

fn member_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

fn diagnose_member(config: &RunConfig, index: usize, n0: i64, psi: &WaveFunction) -> MemberDiagnosis {
    let d = &config.diagnose;
    let ks = phase_uniformity_test(psi, d.population_cutoff);
    let randomized = randomized_phase_check(psi, d.n_draws, member_seed(d.seed, index), d.relative_floor);
    MemberDiagnosis {
        n0,
        failure: None,
        ks_error: ks.as_ref().err().map(|e| e.to_string()),
        ks: ks.ok(),
        randomized_error: randomized.as_ref().err().map(|e| e.to_string()),
        randomized: randomized.ok(),
    }
}

/// Per-mode `|F|` for the exact functional and both approximations.
fn functional_profile_csv(config: &RunConfig, n0: i64, psi: &WaveFunction) -> String {
    let exact = compute_f_exact(psi);
    let paa = paa_magnitudes(psi);
    let lma = compute_f_lma(psi, config.gamma).magnitudes();
    let grid = psi.grid();
    let mut out = String::new();
    let _ = writeln!(out, "# kickrotor functional profile");
    let _ = writeln!(out, "# code_version: {CODE_VERSION}");
    let _ = writeln!(out, "# config: {}", serde_json::to_string(config).expect("config serializes"));
    let _ = writeln!(out, "# n0: {n0}, kicks: {}", config.diagnose.kicks);
    out.push_str("n,momentum,population,abs_f_exact,abs_f_paa,abs_f_lma\n");
    let pops = psi.populations();
    for k in grid.ascending_indices() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            grid.mode(k),
            format_f64(grid.momentum(k)),
            format_f64(pops[k]),
            format_f64(exact.values[k].norm()),
            format_f64(paa[k]),
            format_f64(lma[k])
        );
    }
    out
}

pub fn diagnose(opts: &RunOptions) -> CliResult<()> {
    let config = opts.resolve()?;
    let d = &config.diagnose;
    let members = config.diagnose_members();
    let states = evolve_members(&PropagatorRegistry::builtin(), &members, &config.params(), d.kicks);

    let mut diagnoses = Vec::with_capacity(states.len());
    let mut first_failure = None;
    let mut first_state = None;
    for (index, (n0, state)) in states.into_iter().enumerate() {
        match state {
            Ok(psi) => {
                diagnoses.push(diagnose_member(&config, index, n0, &psi));
                if first_state.is_none() {
                    first_state = Some((n0, psi));
                }
            }
            Err(e) => {
                diagnoses.push(MemberDiagnosis {
                    n0,
                    failure: Some(e.to_string()),
                    ks: None,
                    ks_error: None,
                    randomized: None,
                    randomized_error: None,
                });
                first_failure.get_or_insert(e);
            }
        }
    }

    let mut written = Vec::new();
    let mut fidelity = None;
    let mut correlation = None;
    if let Some((n0, psi)) = &first_state {
        fidelity = functional_fidelity(psi, FIDELITY_POPULATION_FLOOR).ok();
        if d.correlation_draws > 0 {
            let amplitudes: Vec<f64> = psi.amplitudes().iter().map(|c| c.norm()).collect();
            let r = phase_correlation_check(&amplitudes, d.correlation_draws, d.seed)?;
            correlation = Some(CorrelationSummary {
                n_draws: r.n_draws,
                total_ff: r.total_ff,
                total_ff_stderr: r.total_ff_stderr,
                expected_total_ff: r.expected_total_ff,
                closed_form_total_ff: r.closed_form_total_ff,
                max_abs_mode_z: r.expected_ff_z_scores().iter().fold(0.0, |m, z| f64::max(m, z.abs())),
                offdiag_ff_scaled_rms: r.offdiag_ff_scaled_rms,
                offdiag_ff_scaled_max: r.offdiag_ff_scaled_max,
                max_population: r.max_population,
            });
        }
        if config.output.formats.contains(&crate::config::Format::Csv) {
            let p = with_suffix(&stem(&config, "diagnose_profile"), "csv");
            write_text(&p, &functional_profile_csv(&config, *n0, psi))?;
            written.push(p);
        }
    }

    let ks_not_rejected = diagnoses.iter().filter(|m| m.ks.as_ref().is_some_and(|k| k.p_value > KS_LEVEL)).count();
    let doc = DiagnoseDocument {
        format: "kickrotor.diagnose".into(),
        code_version: CODE_VERSION.into(),
        config: config.clone(),
        kicks: d.kicks,
        seed: d.seed,
        ks_level: KS_LEVEL,
        ks_not_rejected,
        members: diagnoses,
        fidelity,
        correlation,
    };
    let p = with_suffix(&stem(&config, "diagnose"), "json");
    write_json(&p, &doc)?;
    written.push(p);
    report(&written);
    match first_failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDocument {
    pub format: String,
    pub code_version: String,
    pub config: RunConfig,
    pub table: ConvergenceTable,
}

fn convergence_csv(doc: &ConvergenceDocument) -> String {
    let t = &doc.table;
    let mut out = String::new();
    let _ = writeln!(out, "# kickrotor time-step convergence");
    let _ = writeln!(out, "# code_version: {CODE_VERSION}");
    let _ = writeln!(out, "# config: {}", serde_json::to_string(&doc.config).expect("config serializes"));
    let _ = writeln!(out, "# horizon: {}, initial_momenta: {:?}", t.horizon, t.initial_momenta);
    out.push_str("dt,energy,difference_to_next,ratio_to_next\n");
    for (k, row) in t.rows.iter().enumerate() {
        let diff = t.differences.get(k).map(|v| format_f64(*v)).unwrap_or_default();
        let ratio = t.ratios.get(k).map(|v| format_f64(*v)).unwrap_or_default();
        let _ = writeln!(out, "{},{},{diff},{ratio}", format_f64(row.dt), format_f64(row.energy));
    }
    out
}

pub fn convergence(opts: &RunOptions) -> CliResult<()> {
    let config = opts.resolve()?;
    let c = &config.convergence;
    let table = convergence_study(
        &PropagatorRegistry::builtin(),
        &config.params(),
        &c.dt_values,
        c.horizon,
        &config.convergence_members(),
    )?;
    let doc = ConvergenceDocument {
        format: "kickrotor.convergence".into(),
        code_version: CODE_VERSION.into(),
        config: config.clone(),
        table,
    };
    let base = stem(&config, "convergence");
    let mut written = Vec::new();
    for format in &config.output.formats {
        let p = match format {
            crate::config::Format::Json => {
                let p = with_suffix(&base, "json");
                write_json(&p, &doc)?;
                p
            }
            crate::config::Format::Csv => {
                let p = with_suffix(&base, "csv");
                write_text(&p, &convergence_csv(&doc))?;
                p
            }
        };
        written.push(p);
    }
    report(&written);
    Ok(())
}

/// Input of `convert-units`: a parameter file, or overrides of the potassium example.
#[derive(Debug, Clone, Default)]
pub struct UnitsRequest {
    pub config: Option<PathBuf>,
    pub transverse_size: Option<f64>,
    pub transverse_frequency_hz: Option<f64>,
    pub atom_number: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub input: PhysicalParams,
    pub result: DimensionlessParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitsDocument {
    pub format: String,
    pub code_version: String,
    pub conversions: Vec<Conversion>,
}

/// Default transverse confinements of the potassium example.
pub const EXAMPLE_TRANSVERSE_SIZE: f64 = 5e-6;
pub const EXAMPLE_TRANSVERSE_FREQUENCY_HZ: f64 = 62.0;

fn requested_inputs(req: &UnitsRequest) -> CliResult<Vec<PhysicalParams>> {
    if let Some(path) = &req.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let phys: PhysicalParams =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        return Ok(vec![phys]);
    }
    let mut confinements = Vec::new();
    if let Some(l) = req.transverse_size {
        confinements.push(TransverseConfinement::Size(l));
    }
    if let Some(f) = req.transverse_frequency_hz {
        confinements.push(TransverseConfinement::Frequency(TAU * f));
    }
    if confinements.is_empty() {
        confinements = vec![
            TransverseConfinement::Size(EXAMPLE_TRANSVERSE_SIZE),
            TransverseConfinement::Frequency(TAU * EXAMPLE_TRANSVERSE_FREQUENCY_HZ),
        ];
    }
    Ok(confinements
        .into_iter()
        .map(|t| {
            let mut p = PhysicalParams::potassium_example(t);
            if let Some(n) = req.atom_number {
                p.atom_number = n;
            }
            p
        })
        .collect())
}

pub fn convert_units(req: &UnitsRequest, output: Option<&Path>) -> CliResult<()> {
    let conversions = requested_inputs(req)?
        .into_iter()
        .map(|input| {
            let result = to_dimensionless(&input)?;
            Ok(Conversion { input, result })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let doc = UnitsDocument { format: "kickrotor.units".into(), code_version: CODE_VERSION.into(), conversions };
    print!("{}", to_json(&doc));
    if let Some(p) = output {
        write_json(p, &doc)?;
    }
    Ok(())
}
