use std::f64::consts::TAU;

use kickrotor_core::analysis::{
    fit_power_law, ks_uniform, phase_correlation_check, phase_uniformity_test, randomized_phase_check,
    DEFAULT_POPULATION_CUTOFF,
};
use kickrotor_core::{Complex64, Error, ModeGrid, WaveFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn broad_profile(n: usize, width: f64) -> Vec<f64> {
    let mut a: Vec<f64> = (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            (-(m * m) / (4.0 * width * width)).exp()
        })
        .collect();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter_mut().for_each(|x| *x /= norm);
    a
}

#[test]
fn ks_accepts_uniform_phases_at_the_nominal_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 400;
    let accepted = (0..trials)
        .filter(|_| {
            let xs: Vec<f64> = (0..1024).map(|_| rng.random::<f64>()).collect();
            ks_uniform(&xs).p_value > 0.01
        })
        .count();
    assert!(accepted as f64 >= 0.95 * trials as f64, "{accepted}/{trials}");
}

#[test]
fn ks_rejects_equal_phases() {
    let grid = ModeGrid::new(256, 1.0).unwrap();
    let amps = (0..256).map(|_| Complex64::from_polar(1.0, 0.7)).collect();
    let psi = WaveFunction::normalized(grid, amps).unwrap();
    let ks = phase_uniformity_test(&psi, DEFAULT_POPULATION_CUTOFF).unwrap();
    assert!(ks.p_value < 1e-6);
}

#[test]
fn phase_test_needs_enough_populated_modes() {
    let grid = ModeGrid::new(256, 1.0).unwrap();
    let psi = WaveFunction::plane_wave(grid, 3).unwrap();
    assert!(matches!(phase_uniformity_test(&psi, DEFAULT_POPULATION_CUTOFF), Err(Error::TooFewModes { found: 1, .. })));
}

#[test]
fn fit_recovers_synthetic_power_laws() {
    let times: Vec<u64> = (1..=40).map(|k| 10 * k).collect();
    let energies: Vec<f64> = times.iter().map(|&t| 7.0 * (t as f64).powf(0.5)).collect();
    let fit = fit_power_law(&times, &energies, (10, 400)).unwrap();
    assert!((fit.alpha - 0.5).abs() < 1e-8);
    assert!((fit.intercept - 7f64.ln()).abs() < 1e-8);
    let flat = vec![3.0; times.len()];
    assert!(fit_power_law(&times, &flat, (10, 400)).unwrap().alpha.abs() < 1e-8);
}

#[test]
fn fit_uses_only_the_window() {
    let times: Vec<u64> = (1..=100).collect();
    let energies: Vec<f64> = times.iter().map(|&t| if t < 50 { 1.0 } else { (t as f64).powf(0.3) }).collect();
    let fit = fit_power_law(&times, &energies, (50, 100)).unwrap();
    assert!((fit.alpha - 0.3).abs() < 1e-10);
    assert_eq!(fit.n_samples, 51);
    assert!(matches!(fit_power_law(&times, &energies, (98, 100)), Err(Error::InsufficientSamples { found: 3, .. })));
    let mut bad = energies.clone();
    bad[60] = 0.0;
    assert!(matches!(fit_power_law(&times, &bad, (50, 100)), Err(Error::NonPositiveEnergy { time: 61, .. })));
}

#[test]
fn fit_stderr_scales_as_inverse_root_samples() {
    let sigma = 0.05;
    let mean_stderr = |n: usize| {
        let mut total = 0.0;
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let times: Vec<u64> =
                (0..n).map(|k| (1000.0 * 1000f64.powf(k as f64 / (n - 1) as f64)).round() as u64).collect();
            let energies: Vec<f64> = times
                .iter()
                .map(|&t| {
                    // Box-Muller log-normal noise
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    let z = (-2.0 * (1.0 - u).ln()).sqrt() * (TAU * v).cos();
                    (t as f64).powf(0.6) * (sigma * z).exp()
                })
                .collect();
            total += fit_power_law(&times, &energies, (1, u64::MAX)).unwrap().stderr;
        }
        total / 40.0
    };
    let ratio = mean_stderr(50) / mean_stderr(800);
    assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
}

#[test]
fn randomizing_phases_leaves_few_mode_functionals_unchanged() {
    let grid = ModeGrid::new(32, 2.89).unwrap();
    let plane = WaveFunction::plane_wave(grid, 5).unwrap();
    let r = randomized_phase_check(&plane, 20, 1, 1e-3).unwrap();
    assert_eq!(r.modes_compared, 1);
    assert!(r.max_abs_log10_ratio < 1e-12);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pair = WaveFunction::from_modes(grid, &[(0, Complex64::new(s, 0.0)), (1, Complex64::new(0.0, s))]).unwrap();
    let r = randomized_phase_check(&pair, 20, 1, 1e-3).unwrap();
    assert_eq!(r.modes_compared, 4);
    assert!(r.max_abs_log10_ratio < 1e-12);
}

#[test]
fn correlation_off_diagonals_decay_as_inverse_root_draws() {
    let a = broad_profile(64, 20.0);
    let rms: Vec<f64> =
        [100, 1000, 10_000].iter().map(|&d| phase_correlation_check(&a, d, 5).unwrap().offdiag_ff_scaled_rms).collect();
    let slope = (rms[2] / rms[0]).log10() / 2.0;
    assert!((-0.6..-0.4).contains(&slope), "rms {rms:?}");
}

#[test]
fn correlation_diagonal_matches_random_phase_expectation() {
    let a = broad_profile(128, 40.0);
    let r = phase_correlation_check(&a, 4000, 9).unwrap();
    let z = (r.total_ff - r.expected_total_ff) / r.total_ff_stderr;
    assert!(z.abs() < 3.0, "z = {z}");
    let within = r.expected_ff_z_scores().iter().filter(|z| z.abs() <= 3.0).count();
    assert!(within as f64 >= 0.98 * 128.0);
    // the closed form is the small-population limit of the expectation
    for (c, e) in r.closed_form_ff.iter().zip(&r.expected_ff) {
        assert!(((c - e) / e).abs() < 4.0 * r.max_population);
    }
    for ((m, c), s) in r.diag_fpsi.iter().zip(&r.closed_form_fpsi).zip(&r.diag_fpsi_stderr) {
        assert!((m.re - c).abs() < 5.0 * s + 2.0 * r.max_population * c);
    }
}

#[test]
fn correlation_check_validates_input() {
    assert!(phase_correlation_check(&[0.5; 16], 10, 0).is_err());
    assert!(phase_correlation_check(&broad_profile(16, 3.0), 0, 0).is_err());
}

#[test]
fn diagnostics_are_deterministic_given_a_seed() {
    let a = broad_profile(32, 8.0);
    assert_eq!(phase_correlation_check(&a, 300, 4).unwrap(), phase_correlation_check(&a, 300, 4).unwrap());
    let grid = ModeGrid::new(32, 2.89).unwrap();
    let psi = WaveFunction::normalized(grid, a.iter().map(|&x| Complex64::from_polar(x, 7.0 * x)).collect()).unwrap();
    assert_eq!(randomized_phase_check(&psi, 50, 4, 1e-3).unwrap(), randomized_phase_check(&psi, 50, 4, 1e-3).unwrap());
    assert_ne!(randomized_phase_check(&psi, 50, 4, 1e-3).unwrap(), randomized_phase_check(&psi, 50, 5, 1e-3).unwrap());
}
