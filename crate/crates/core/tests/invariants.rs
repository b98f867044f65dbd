use kickrotor_core::propagators::{apply_kick, lma_period, paa_period, LocalMomentum, PhaseAveraging};
use kickrotor_core::spectral::{from_real_space, to_real_space};
use kickrotor_core::{methods, Complex64, ModeGrid, PropagatorRegistry, SimulationParams, WaveFunction};
use proptest::prelude::*;

fn state(n_modes: usize, raw: &[(f64, f64)]) -> WaveFunction {
    let grid = ModeGrid::new(n_modes, 2.89).unwrap();
    let amps = raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    WaveFunction::normalized(grid, amps).unwrap()
}

/// Equal up to the rounding of one complex multiplication by a unit phase.
fn same_modulus(a: Complex64, b: Complex64) -> bool {
    (a.norm() - b.norm()).abs() <= 4.0 * f64::EPSILON * a.norm()
}

fn amplitudes(n_modes: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n_modes)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_space_round_trip_and_parseval(raw in amplitudes(64)) {
        let psi = state(64, &raw);
        let real = to_real_space(&psi, 128).unwrap();
        let dx = std::f64::consts::TAU / 128.0;
        let integral: f64 = real.iter().map(|u| u.norm_sqr()).sum::<f64>() * dx;
        prop_assert!((integral - 1.0).abs() < 1e-12);
        let back = from_real_space(&real, &psi).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn kinetic_energy_ignores_global_phase_and_reflection(raw in amplitudes(32), phase in 0.0..6.3f64) {
        let psi = state(32, &raw);
        let grid = *psi.grid();
        let rotated: Vec<Complex64> = psi.amplitudes().iter().map(|c| c * Complex64::from_polar(1.0, phase)).collect();
        let rotated = WaveFunction::from_raw(grid, rotated).unwrap();
        // n -> -n, leaving the unpaired mode -N/2 in place
        let half = grid.half();
        let mut reflected = vec![Complex64::default(); grid.n_modes()];
        for n in -half..half {
            let m = if n == -half { n } else { -n };
            reflected[grid.index(m).unwrap()] = psi.amplitude(n);
        }
        let reflected = WaveFunction::from_raw(grid, reflected).unwrap();
        let e = psi.kinetic_energy();
        prop_assert!((rotated.kinetic_energy() - e).abs() < 1e-10 * e.max(1.0));
        prop_assert!((reflected.kinetic_energy() - e).abs() < 1e-10 * e.max(1.0));
    }

    #[test]
    fn kick_preserves_norm(raw in amplitudes(64), k in 0.0..20.0f64) {
        // random modes -32..31 on a window wide enough for the kicked tails
        let grid = ModeGrid::new(256, 2.89).unwrap();
        let modes: Vec<(i64, Complex64)> =
            raw.iter().enumerate().map(|(i, &(re, im))| (i as i64 - 32, Complex64::new(re, im))).collect();
        let psi = WaveFunction::from_modes(grid, &modes).unwrap();
        let psi = WaveFunction::normalized(grid, psi.amplitudes().to_vec()).unwrap();
        prop_assert!((apply_kick(&psi, k).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn approximate_free_evolution_keeps_every_modulus(raw in amplitudes(64), g in 0.0..20.0f64) {
        let psi = state(64, &raw);
        let params = SimulationParams::new(2.89, 12.0, g, methods::LMA).with_grid(64);
        let mut lma = psi.amplitudes().to_vec();
        LocalMomentum::new(&params).unwrap().free_period(&mut lma);
        let mut paa = psi.amplitudes().to_vec();
        PhaseAveraging::new(&params.clone().with_method(methods::PAA)).unwrap().free_period(&mut paa);
        for ((c, a), b) in psi.amplitudes().iter().zip(&lma).zip(&paa) {
            prop_assert!(same_modulus(*c, *a));
            prop_assert!(same_modulus(*c, *b));
        }
    }
}

#[test]
fn every_method_conserves_norm_per_period() {
    let registry = PropagatorRegistry::builtin();
    let grid = ModeGrid::new(512, 2.89).unwrap();
    for method in [methods::GPE, methods::LMA, methods::PAA, methods::NONINTERACTING] {
        let params = SimulationParams::new(2.89, 12.0, 10.0, method).with_grid(512).with_dt(1e-2);
        let mut prop = registry.build(&params).unwrap();
        let mut psi = WaveFunction::plane_wave(grid, 3).unwrap();
        for _ in 0..20 {
            let before = psi.norm_sqr();
            prop.advance(&mut psi).unwrap();
            assert!((psi.norm_sqr() - before).abs() < 1e-10, "{method}");
        }
    }
}

#[test]
fn lma_and_paa_periods_change_moduli_only_through_the_kick() {
    let grid = ModeGrid::new(64, 2.89).unwrap();
    let psi = WaveFunction::from_modes(grid, &[(0, Complex64::new(0.8, 0.0)), (3, Complex64::new(0.0, 0.6))]).unwrap();
    let params = SimulationParams::new(2.89, 0.0, 5.0, methods::LMA).with_grid(64);
    let after = lma_period(&psi, &params).unwrap();
    let paa = paa_period(&psi, &params.with_method(methods::PAA)).unwrap();
    for ((a, b), c) in psi.amplitudes().iter().zip(after.amplitudes()).zip(paa.amplitudes()) {
        assert!(same_modulus(*a, *b));
        assert!(same_modulus(*a, *c));
    }
}
