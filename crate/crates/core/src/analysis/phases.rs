//! Random-phase diagnostics for momentum-space states.
//!
//! These quantify how close a kicked state is to one whose phases `phi(p)`
//! are independent and uniform on `[0, 2pi)`: a Kolmogorov-Smirnov test of the
//! phase distribution, a comparison of `|F|` after re-drawing the phases, and
//! Monte-Carlo estimates of the random-phase correlation identities.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::propagators::{compute_f_exact, paa_magnitudes, CubicFunctional};
use crate::wavefunction::WaveFunction;

/// Modes with population `A(p)^2` below this carry numerically meaningless phases.
pub const DEFAULT_POPULATION_CUTOFF: f64 = 1e-12;
pub const MIN_PHASE_SAMPLES: usize = 50;
/// Modes where `|F(psi)|` falls below this fraction of its maximum are left out
/// of the randomized-phase comparison.
pub const DEFAULT_RELATIVE_F_FLOOR: f64 = 1e-3;

/// Draws per rayon task; fixed so reductions do not depend on thread count.
const DRAW_CHUNK: usize = 64;
const CHUNKS_PER_BATCH: usize = 8;

fn draw_rng(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n_samples: usize,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small arguments
        let mut cdf = 0.0;
        let c = PI * PI / (8.0 * lambda * lambda);
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            cdf += (-m * m * c).exp();
        }
        (1.0 - (TAU).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// One-sample KS test of `samples` against the uniform distribution on `[0, 1)`.
pub fn ks_uniform(samples: &[f64]) -> KsOutcome {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let cdf = x.clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / nf - cdf).max(cdf - i as f64 / nf);
    }
    let sn = nf.sqrt();
    let p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    KsOutcome { statistic: d, p_value, n_samples: n }
}

/// KS test of the phases `phi(p)` of modes with `A(p)^2 >= population_cutoff`
/// against the uniform law on `[0, 2pi)`.
pub fn phase_uniformity_test(psi: &WaveFunction, population_cutoff: f64) -> Result<KsOutcome> {
    let phases: Vec<f64> = psi
        .amplitudes()
        .iter()
        .filter(|c| c.norm_sqr() >= population_cutoff)
        .map(|c| c.arg().rem_euclid(TAU) / TAU)
        .collect();
    if phases.len() < MIN_PHASE_SAMPLES {
        return Err(Error::TooFewModes { found: phases.len(), required: MIN_PHASE_SAMPLES });
    }
    Ok(ks_uniform(&phases))
}

/// Summary of `log10(|F(psi_rand)| / |F(psi)|)` over draws and selected modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedPhaseReport {
    pub n_draws: usize,
    pub modes_compared: usize,
    pub median_log10_ratio: f64,
    pub mean_log10_ratio: f64,
    pub median_abs_log10_ratio: f64,
    pub q10_log10_ratio: f64,
    pub q90_log10_ratio: f64,
    /// Largest `|log10 ratio|` observed.
    pub max_abs_log10_ratio: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Replaces every phase by an independent uniform draw and compares the
/// modulus of the cubic functional with that of the original state, on modes
/// where `|F(psi)| > relative_floor * max |F(psi)|`.
pub fn randomized_phase_check(
    psi: &WaveFunction,
    n_draws: usize,
    seed: u64,
    relative_floor: f64,
) -> Result<RandomizedPhaseReport> {
    if n_draws == 0 {
        return Err(invalid("n_draws", "must be at least 1"));
    }
    let n = psi.grid().n_modes();
    let mut functional = CubicFunctional::new(n);
    let mut reference = vec![Complex64::default(); n];
    functional.evaluate(psi.amplitudes(), &mut reference);
    let f_max = reference.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let selected: Vec<usize> =
        (0..n).filter(|&i| reference[i].norm() > relative_floor * f_max && reference[i].norm() > 0.0).collect();
    let amplitudes: Vec<f64> = psi.amplitudes().iter().map(|c| c.norm()).collect();

    let per_draw: Vec<Vec<f64>> = (0..n_draws)
        .into_par_iter()
        .map_init(
            || (CubicFunctional::new(n), vec![Complex64::default(); n], vec![Complex64::default(); n]),
            |(functional, randomized, f_rand), draw| {
                let mut rng = draw_rng(seed, draw as u64);
                for (r, &a) in randomized.iter_mut().zip(&amplitudes) {
                    *r = Complex64::from_polar(a, rng.random::<f64>() * TAU);
                }
                functional.evaluate(randomized, f_rand);
                selected.iter().map(|&i| (f_rand[i].norm() / reference[i].norm()).log10()).collect()
            },
        )
        .collect();

    let mut all: Vec<f64> = per_draw.into_iter().flatten().collect();
    let mean = all.iter().sum::<f64>() / all.len().max(1) as f64;
    let mut abs: Vec<f64> = all.iter().map(|v| v.abs()).collect();
    all.sort_by(f64::total_cmp);
    abs.sort_by(f64::total_cmp);
    Ok(RandomizedPhaseReport {
        n_draws,
        modes_compared: selected.len(),
        median_log10_ratio: quantile(&all, 0.5),
        mean_log10_ratio: mean,
        median_abs_log10_ratio: quantile(&abs, 0.5),
        q10_log10_ratio: quantile(&all, 0.1),
        q90_log10_ratio: quantile(&all, 0.9),
        max_abs_log10_ratio: abs.last().copied().unwrap_or(f64::NAN),
    })
}

/// Agreement of `|F_PAA|` with `|F_exact|` on the populated modes of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalFidelity {
    pub population_floor: f64,
    pub modes_compared: usize,
    /// Median over modes of `|log10(|F_PAA| / |F_exact|)|`.
    pub median_abs_log10_ratio: f64,
    pub median_log10_ratio: f64,
    pub max_abs_log10_ratio: f64,
}

/// Compares the phase-averaged and exact functional magnitudes on modes with
/// `A(p)^2 > population_floor`.
pub fn functional_fidelity(psi: &WaveFunction, population_floor: f64) -> Result<FunctionalFidelity> {
    let exact = compute_f_exact(psi);
    let paa = paa_magnitudes(psi);
    let ratios: Vec<f64> = psi
        .populations()
        .iter()
        .zip(exact.values.iter().zip(&paa))
        .filter(|(b, _)| **b > population_floor)
        .map(|(_, (e, a))| (a / e.norm()).log10())
        .collect();
    if ratios.is_empty() {
        return Err(Error::TooFewModes { found: 0, required: 1 });
    }
    let abs: Vec<f64> = ratios.iter().map(|r| r.abs()).collect();
    Ok(FunctionalFidelity {
        population_floor,
        modes_compared: ratios.len(),
        median_abs_log10_ratio: median(&abs),
        median_log10_ratio: median(&ratios),
        max_abs_log10_ratio: abs.iter().copied().fold(0.0, f64::max),
    })
}

/// Monte-Carlo estimates of random-phase averages for a fixed amplitude profile.
///
/// Vectors are FFT-ordered like the amplitudes. "Scaled" off-diagonal figures
/// are root-mean-square magnitudes over `p != p'` divided by the mean of the
/// corresponding diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n_draws: usize,
    /// Mean of `F(p)`.
    pub mean_f: Vec<Complex64>,
    /// Mean of `F(p) e^{-i phi(p)}`.
    pub mean_f_aligned: Vec<Complex64>,
    /// Mean of `|F(p)|^2` and its Monte-Carlo standard error.
    pub diag_ff: Vec<f64>,
    pub diag_ff_stderr: Vec<f64>,
    /// `(2pi)^{-2} (4 A(p)^2 + 2 S(p))`.
    pub closed_form_ff: Vec<f64>,
    /// Exact random-phase expectation of `|F(p)|^2`, including the
    /// self-correlated terms the closed form drops (relative size `A^2`).
    pub expected_ff: Vec<f64>,
    /// Mode sum `sum_p |F(p)|^2`: Monte-Carlo mean, its standard error, and
    /// the two predictions summed over modes.
    pub total_ff: f64,
    pub total_ff_stderr: f64,
    pub expected_total_ff: f64,
    pub closed_form_total_ff: f64,
    pub offdiag_ff_scaled_rms: f64,
    pub offdiag_ff_scaled_max: f64,
    /// Mean of `F(p) conj(psi_hat(p))` and its standard error (real part).
    pub diag_fpsi: Vec<Complex64>,
    pub diag_fpsi_stderr: Vec<f64>,
    /// `A(p)^2 / pi`.
    pub closed_form_fpsi: Vec<f64>,
    pub offdiag_fpsi_scaled_rms: f64,
    /// Largest `A(p)^2`; the closed forms neglect corrections of this relative size.
    pub max_population: f64,
}

impl CorrelationReport {
    /// `(mean |F|^2 - closed form) / stderr` per mode.
    pub fn ff_z_scores(&self) -> Vec<f64> {
        self.z_scores_against(&self.closed_form_ff)
    }

    /// `(mean |F|^2 - expected) / stderr` per mode, against the exact expectation.
    pub fn expected_ff_z_scores(&self) -> Vec<f64> {
        self.z_scores_against(&self.expected_ff)
    }

    fn z_scores_against(&self, reference: &[f64]) -> Vec<f64> {
        self.diag_ff
            .iter()
            .zip(reference)
            .zip(&self.diag_ff_stderr)
            .map(|((m, c), s)| if *s > 0.0 { (m - c) / s } else { 0.0 })
            .collect()
    }
}

struct CorrelationSums {
    f: Vec<Complex64>,
    f_aligned: Vec<Complex64>,
    ff: Vec<f64>,
    ff_sq: Vec<f64>,
    total: f64,
    total_sq: f64,
    fpsi_sq: Vec<f64>,
    cross_ff: Vec<Complex64>,
    cross_fpsi: Vec<Complex64>,
}

impl CorrelationSums {
    fn zeros(n: usize) -> Self {
        Self {
            f: vec![Complex64::default(); n],
            f_aligned: vec![Complex64::default(); n],
            ff: vec![0.0; n],
            ff_sq: vec![0.0; n],
            total: 0.0,
            total_sq: 0.0,
            fpsi_sq: vec![0.0; n],
            cross_ff: vec![Complex64::default(); n * n],
            cross_fpsi: vec![Complex64::default(); n * n],
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        fn add<T: Copy + std::ops::AddAssign>(a: &mut [T], b: &[T]) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += *y);
        }
        add(&mut self.f, &other.f);
        add(&mut self.f_aligned, &other.f_aligned);
        add(&mut self.ff, &other.ff);
        add(&mut self.ff_sq, &other.ff_sq);
        self.total += other.total;
        self.total_sq += other.total_sq;
        add(&mut self.fpsi_sq, &other.fpsi_sq);
        add(&mut self.cross_ff, &other.cross_ff);
        add(&mut self.cross_fpsi, &other.cross_fpsi);
        self
    }
}

/// Monte-Carlo check of the random-phase identities for amplitudes `A(p)`
/// (FFT order, `sum A^2 = 1`).
pub fn phase_correlation_check(amplitudes: &[f64], n_draws: usize, seed: u64) -> Result<CorrelationReport> {
    let n = amplitudes.len();
    if n_draws == 0 {
        return Err(invalid("n_draws", "must be at least 1"));
    }
    let total: f64 = amplitudes.iter().map(|a| a * a).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(invalid("amplitudes", format!("sum of A^2 must be 1, got {total}")));
    }
    if n < 16 || n % 2 != 0 {
        return Err(invalid("amplitudes", "length must be even and at least 16"));
    }

    let chunks: Vec<(usize, usize)> =
        (0..n_draws).step_by(DRAW_CHUNK).map(|start| (start, (start + DRAW_CHUNK).min(n_draws))).collect();
    let accumulate = |&(start, end): &(usize, usize)| {
        let mut sums = CorrelationSums::zeros(n);
        let mut functional = CubicFunctional::new(n);
        let mut psi = vec![Complex64::default(); n];
        let mut f = vec![Complex64::default(); n];
        for draw in start..end {
            let mut rng = draw_rng(seed, draw as u64);
            for (c, &a) in psi.iter_mut().zip(amplitudes) {
                *c = Complex64::from_polar(a, rng.random::<f64>() * TAU);
            }
            functional.evaluate(&psi, &mut f);
            let total: f64 = f.iter().map(|v| v.norm_sqr()).sum();
            sums.total += total;
            sums.total_sq += total * total;
            for p in 0..n {
                let fp = f[p];
                sums.f[p] += fp;
                let unit = if amplitudes[p] > 0.0 { psi[p].conj() / amplitudes[p] } else { Complex64::default() };
                sums.f_aligned[p] += fp * unit;
                let m = fp.norm_sqr();
                sums.ff[p] += m;
                sums.ff_sq[p] += m * m;
                let fpsi = (fp * psi[p].conj()).re;
                sums.fpsi_sq[p] += fpsi * fpsi;
                let row_ff = &mut sums.cross_ff[p * n..(p + 1) * n];
                for (acc, fq) in row_ff.iter_mut().zip(&f) {
                    *acc += fp * fq.conj();
                }
                let row_fpsi = &mut sums.cross_fpsi[p * n..(p + 1) * n];
                for (acc, cq) in row_fpsi.iter_mut().zip(&psi) {
                    *acc += fp * cq.conj();
                }
            }
        }
        sums
    };
    // bounded batches keep the n^2 cross sums in memory a few at a time
    let mut sums = CorrelationSums::zeros(n);
    for batch in chunks.chunks(CHUNKS_PER_BATCH) {
        let partial: Vec<CorrelationSums> = batch.par_iter().map(accumulate).collect();
        sums = partial.iter().fold(sums, |acc, s| acc.merge(s));
    }

    let draws = n_draws as f64;
    let mean_f: Vec<Complex64> = sums.f.iter().map(|v| v / draws).collect();
    let mean_f_aligned = sums.f_aligned.iter().map(|v| v / draws).collect();
    let diag_ff: Vec<f64> = sums.ff.iter().map(|v| v / draws).collect();
    let diag_ff_stderr = sums.ff_sq.iter().zip(&diag_ff).map(|(sq, m)| standard_error(*sq, *m, n_draws)).collect();
    let diag_fpsi: Vec<Complex64> = (0..n).map(|p| sums.cross_fpsi[p * n + p] / draws).collect();
    let diag_fpsi_stderr =
        sums.fpsi_sq.iter().zip(&diag_fpsi).map(|(sq, m)| standard_error(*sq, m.re, n_draws)).collect();

    let populations: Vec<f64> = amplitudes.iter().map(|a| a * a).collect();
    let mut triple = vec![0.0; n];
    CubicFunctional::new(n).triple_convolution(&populations, &mut triple);
    let closed_form_ff: Vec<f64> =
        populations.iter().zip(&triple).map(|(b, s)| (4.0 * b + 2.0 * s) / (4.0 * PI * PI)).collect();
    let closed_form_fpsi = populations.iter().map(|b| b / PI).collect();
    let expected_ff = exact_ff_expectation(&populations, &triple);
    let total_ff = sums.total / draws;

    let diag_ff_mean = diag_ff.iter().sum::<f64>() / n as f64;
    let (ff_rms, ff_max) = offdiag_stats(&sums.cross_ff, n, draws);
    let diag_fpsi_mean = diag_fpsi.iter().map(|v| v.norm()).sum::<f64>() / n as f64;
    let (fpsi_rms, _) = offdiag_stats(&sums.cross_fpsi, n, draws);

    Ok(CorrelationReport {
        n_draws,
        mean_f,
        mean_f_aligned,
        diag_ff,
        diag_ff_stderr,
        total_ff,
        total_ff_stderr: standard_error(sums.total_sq, total_ff, n_draws),
        expected_total_ff: expected_ff.iter().sum(),
        closed_form_total_ff: closed_form_ff.iter().sum(),
        closed_form_ff,
        expected_ff,
        offdiag_ff_scaled_rms: ff_rms / diag_ff_mean,
        offdiag_ff_scaled_max: ff_max / diag_ff_mean,
        diag_fpsi,
        diag_fpsi_stderr,
        closed_form_fpsi,
        offdiag_fpsi_scaled_rms: fpsi_rms / diag_fpsi_mean,
        max_population: populations.iter().copied().fold(0.0, f64::max),
    })
}

/// `E|F(p)|^2` for independent uniform phases on the populations `b = A^2`
/// (FFT order), given `S(p)` for the same populations.
///
/// Splitting the double sum into the terms whose phase is pinned to `phi(p)`
/// (`p2 = p1` or `p2 = p`) and the rest gives
/// `(2pi)^2 E|F|^2 = b(2 - b)^2 + 2 (S - 2 b Q + b^3) - D` with `Q = sum b^2`
/// and `D(p) = sum_{q != p} b(2q - p) b(q)^2`.
fn exact_ff_expectation(populations: &[f64], triple: &[f64]) -> Vec<f64> {
    let n = populations.len() as i64;
    let half = n / 2;
    let mode = |i: usize| if (i as i64) < half { i as i64 } else { i as i64 - n };
    let at = |m: i64| -> f64 {
        if m >= -half && m < half {
            populations[m.rem_euclid(n) as usize]
        } else {
            0.0
        }
    };
    let q: f64 = populations.iter().map(|b| b * b).sum();
    (0..populations.len())
        .map(|i| {
            let p = mode(i);
            let b = populations[i];
            let d: f64 = (0..populations.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let m = mode(j);
                    at(2 * m - p) * populations[j] * populations[j]
                })
                .sum();
            let total = b * (2.0 - b).powi(2) + 2.0 * (triple[i] - 2.0 * b * q + b.powi(3)) - d;
            total / (4.0 * PI * PI)
        })
        .collect()
}

fn standard_error(sum_sq: f64, mean: f64, n: usize) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let var = ((sum_sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    (var / nf).sqrt()
}

fn offdiag_stats(matrix: &[Complex64], n: usize, draws: f64) -> (f64, f64) {
    let mut sum_sq = 0.0;
    let mut max: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                let m = (matrix[p * n + q] / draws).norm();
                sum_sq += m * m;
                max = max.max(m);
            }
        }
    }
    ((sum_sq / (n * (n - 1)) as f64).sqrt(), max)
}
