//! Spectral routines checked against independent brute-force evaluations.

use std::f64::consts::PI;

use kickrotor_core::propagators::{apply_kick, compute_f_exact, compute_f_paa, paa_magnitudes};
use kickrotor_core::{Complex64, ModeGrid, WaveFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `J_n(x)` from its power series; adequate for `x` up to ~10 and any `n >= 0`.
fn bessel_j(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    // first term (x/2)^n / n!
    let mut term = (0..n).fold(1.0, |acc, k| acc * half / (k + 1) as f64);
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-300 {
            break;
        }
    }
    sum
}

fn random_state(grid: ModeGrid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let amps =
        (0..grid.n_modes()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    WaveFunction::normalized(grid, amps).unwrap()
}

fn direct_triple_sum(psi: &WaveFunction) -> Vec<Complex64> {
    let grid = psi.grid();
    let half = grid.half();
    grid.modes()
        .map(|p| {
            let mut acc = Complex64::default();
            for p1 in -half..half {
                for p2 in -half..half {
                    let p3 = p + p1 - p2;
                    if (-half..half).contains(&p3) {
                        acc += psi.amplitude(p1).conj() * psi.amplitude(p2) * psi.amplitude(p3);
                    }
                }
            }
            acc / (2.0 * PI)
        })
        .collect()
}

fn direct_double_sum(psi: &WaveFunction) -> Vec<f64> {
    let grid = psi.grid();
    let half = grid.half();
    let b = |n: i64| psi.amplitude(n).norm_sqr();
    grid.modes()
        .map(|p| {
            let mut acc = 0.0;
            for p1 in -half..half {
                for p2 in -half..half {
                    let p3 = p + p1 - p2;
                    if (-half..half).contains(&p3) {
                        acc += b(p1) * b(p2) * b(p3);
                    }
                }
            }
            acc
        })
        .collect()
}

#[test]
fn series_bessel_matches_tabulated_values() {
    assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    assert!((bessel_j(1, 2.5) - 0.497_094_102_464_274_4).abs() < 1e-15);
    assert!((bessel_j(5, 4.0) - 0.132_086_656_047_098).abs() < 1e-14);
}

#[test]
fn single_kick_populations_are_squared_bessel_functions() {
    let (k, hbar) = (12.0, 2.89);
    let grid = ModeGrid::new(256, hbar).unwrap();
    let psi = apply_kick(&WaveFunction::plane_wave(grid, 0).unwrap(), k);
    for n in -40i64..=40 {
        let j = bessel_j(n.unsigned_abs() as u32, k / hbar);
        assert!((psi.amplitude(n).norm_sqr() - j * j).abs() < 1e-8, "n = {n}");
        // c_n = (-i)^n J_n, with J_{-n} = (-1)^n J_n
        let j = if n < 0 && n % 2 != 0 { -j } else { j };
        let phase = Complex64::new(0.0, -1.0).powi(n as i32);
        assert!((psi.amplitude(n) - phase * j).norm() < 1e-12, "n = {n}");
    }
    assert!((psi.kinetic_energy() - k * k / 2.0).abs() < 1e-6);
    assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn spectral_f_exact_matches_direct_triple_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n_modes in [16, 64, 128] {
        let grid = ModeGrid::new(n_modes, 1.3).unwrap();
        for _ in 0..3 {
            let psi = random_state(grid, &mut rng);
            let fast = compute_f_exact(&psi);
            let slow = direct_triple_sum(&psi);
            for (a, b) in fast.values.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn convolution_s_matches_direct_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n_modes in [16, 64, 128] {
        let grid = ModeGrid::new(n_modes, 1.3).unwrap();
        for _ in 0..3 {
            let psi = random_state(grid, &mut rng);
            let slow = direct_double_sum(&psi);
            let fast = paa_magnitudes(&psi);
            for ((m, s), b) in fast.iter().zip(&slow).zip(psi.populations()) {
                let expected = (4.0 * b + 2.0 * s).sqrt() / (2.0 * PI);
                assert!((m - expected).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn paa_functional_carries_the_state_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let psi = random_state(ModeGrid::new(64, 1.0).unwrap(), &mut rng);
    let f = compute_f_paa(&psi);
    for (v, c) in f.values.iter().zip(psi.amplitudes()) {
        assert!((v / c).arg().abs() < 1e-12);
    }
}
