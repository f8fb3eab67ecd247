//! Randomized invariants across the model, integrator, analytic and sweep
//! layers. Expensive properties run fewer cases.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use spinres::analytic::{
    bessel_j, bessel_j_orders, cdt_missing_resonances, floquet_quasienergies, multiphoton_lines,
    quasistatic_lineshape, sideband_amplitudes, DetuningGrid,
};
use spinres::dynamics::{
    evolve_bloch_with, evolve_schrodinger, simulate_observable, BlochState, ObservableMode, SimConfig, SpinState,
};
use spinres::io::{read_spectrum_csv, write_spectrum_csv};
use spinres::sweep::{
    compute_spectrum, compute_spectrum_with_threads, evaluate_cell, normalize_rows, Frame, Geometry, GridSpec,
    SpectrumGrid, UniformAxis,
};
use spinres::units::mhz_to_angular as mhz;
use spinres::{DriveField, RwaModel, TwoLevelModel};

fn drive() -> impl Strategy<Value = DriveField> {
    (prop::array::uniform3(-20.0..20.0f64), 0.0..700.0f64, 0.0..TAU)
        .prop_map(|(a, c, p)| DriveField::new(a, c, p).unwrap())
}

fn rwa() -> impl Strategy<Value = RwaModel> {
    (-60.0..60.0f64, 0.5..6.0f64, 0.0..25.0f64, 5.0..60.0f64, 0.0..TAU)
        .prop_map(|(d, w, m, f, p)| RwaModel::new(d, w, m, f, p).unwrap())
}

fn short(t_total: f64, dt: f64) -> SimConfig {
    SimConfig { dt, t_total, record_stride: 10, ..SimConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hamiltonian_is_hermitian(delta in 0.0..700.0f64, a in drive(), b in drive(), t in 0.0..100.0f64) {
        let m = TwoLevelModel::new(delta, vec![a, b]).unwrap();
        let h = m.hamiltonian_at(t);
        prop_assert_eq!(h.entry(0, 1), h.entry(1, 0).conj());
        prop_assert_eq!(h.entry(0, 0).im, 0.0);
        prop_assert_eq!(h.entry(1, 1).im, 0.0);
    }

    #[test]
    fn zero_drive_contributes_nothing(delta in 0.0..700.0f64, a in drive(), c in 0.0..700.0f64, t in 0.0..100.0f64) {
        let zero = DriveField::new([0.0; 3], c, 1.0).unwrap();
        let with = TwoLevelModel::new(delta, vec![a, zero]).unwrap().hamiltonian_at(t);
        let without = TwoLevelModel::new(delta, vec![a]).unwrap().hamiltonian_at(t);
        prop_assert_eq!(with, without);
    }

    #[test]
    fn hamiltonian_is_linear_in_drives(delta in 0.0..700.0f64, a in drive(), b in drive(), t in 0.0..100.0f64) {
        let h = |d: Vec<DriveField>| TwoLevelModel::new(delta, d).unwrap().hamiltonian_at(t);
        let (ab, ha, hb, h0) = (h(vec![a, b]), h(vec![a]), h(vec![b]), h(vec![]));
        for i in 0..2 {
            for j in 0..2 {
                let diff = ab.entry(i, j) - (ha.entry(i, j) + hb.entry(i, j) - h0.entry(i, j));
                prop_assert!(diff.norm() < 1e-11, "{diff}");
            }
        }
    }

    #[test]
    fn no_mw_means_diagonal(m in rwa(), t in 0.0..50.0f64) {
        let m = RwaModel::new(m.detuning, 0.0, m.mod_rf, m.omega_rf, m.phase_rf).unwrap();
        prop_assert_eq!(m.hamiltonian_at(t).entry(0, 1).norm(), 0.0);
    }

    #[test]
    fn bessel_recurrence(n in -60i32..60, x in 0.05..80.0f64) {
        let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
        let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "n={n} x={x} {lhs} {rhs}");
    }

    #[test]
    fn bessel_completeness(x in 0.0..50.0f64, extra in 0u32..10) {
        let n = (x + 20.0).ceil() as u32 + extra;
        let j = bessel_j_orders(n, x).unwrap();
        let sum = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        // The upper bound only allows for rounding in the ~100-term sum.
        prop_assert!((1.0 - 1e-9..=1.0 + 128.0 * f64::EPSILON).contains(&sum), "x={x} sum={sum}");
    }

    #[test]
    fn sideband_amplitudes_match_bessel(m in rwa()) {
        let x = 2.0 * m.mod_rf / m.omega_rf;
        let set = sideband_amplitudes(&m, 30).unwrap();
        for (n, a) in set.iter() {
            prop_assert!((a - 0.5 * m.rabi_mw * bessel_j(n, x).unwrap()).abs() < 1e-12);
        }
        let range = (-10.0 * m.omega_rf, 10.0 * m.omega_rf);
        for line in multiphoton_lines(&m, range, 8).unwrap() {
            let a = set.amplitude(line.order).unwrap();
            prop_assert!((line.effective_rabi - 2.0 * a.abs()).abs() < 1e-12);
            prop_assert!((line.detuning - line.order as f64 * m.omega_rf).abs() < 1e-12);
        }
    }

    #[test]
    fn lineshape_normalized_and_symmetric(center in -5.0..5.0f64, mod_rf in 0.0..40.0f64, hwhm in 0.5..5.0f64) {
        let half = 2.0 * mod_rf + 12.0 * hwhm;
        let grid = DetuningGrid::centered(center, half, 2001).unwrap();
        let p = quasistatic_lineshape(center, mod_rf, hwhm, &grid).unwrap();
        prop_assert!(p.density.iter().all(|&d| d >= 0.0));
        prop_assert!((p.trapezoid_integral() - 1.0).abs() < 1e-6);
        let peak = p.density.iter().cloned().fold(0.0, f64::max);
        let n = p.density.len();
        for i in 0..n / 2 {
            prop_assert!((p.density[i] - p.density[n - 1 - i]).abs() <= 1e-6 * peak);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_conserved(m in rwa()) {
        let traj = evolve_schrodinger(&m.driven_hamiltonian(), SpinState::ms0(), &short(2.0, 1e-4)).unwrap();
        prop_assert!(traj.norm_drift <= 1e-6, "{}", traj.norm_drift);
    }

    #[test]
    fn bloch_vector_stays_in_ball(m in rwa(), gamma in 0.0..30.0f64, theta in 0.0..PI, phi in 0.0..TAU, r in 0.0..1.0f64) {
        let r0 = BlochState::new([r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]).unwrap();
        let cfg = SimConfig { dephasing_rate: gamma, record_stride: 1, ..short(1.0, 1e-4) };
        let traj = evolve_bloch_with(&m.driven_hamiltonian(), r0, &cfg).unwrap();
        for s in &traj.samples {
            let v = s.bloch.unwrap();
            prop_assert!((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() <= 1.0 + 1e-9);
            prop_assert!(s.p0 >= -1e-9 && s.p0 <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn undamped_bloch_matches_schrodinger(m in rwa()) {
        let cfg = short(2.0, 1e-4);
        let h = m.driven_hamiltonian();
        let a = evolve_schrodinger(&h, SpinState::ms0(), &cfg).unwrap();
        let b = evolve_bloch_with(&h, BlochState::ms0(), &cfg).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!((x.p0 - y.p0).abs() < 1e-6);
        }
    }

    #[test]
    fn halving_dt_changes_observables_little(m in rwa(), endpoint in any::<bool>()) {
        let mode = if endpoint { ObservableMode::Endpoint } else { ObservableMode::TimeAverage };
        let coarse = SimConfig { observable_mode: mode, ..short(2.0, 1e-4) };
        let fine = SimConfig { dt: 5e-5, ..coarse };
        let h = m.driven_hamiltonian();
        let a = simulate_observable(&h, &coarse).unwrap();
        let b = simulate_observable(&h, &fine).unwrap();
        prop_assert!((a - b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn phase_averaged_rwa_signal_is_even_in_detuning(
        rf in 1.0..16.0f64, d in 0.0..20.0f64, w in 0.1..1.0f64, m in 0.0..5.0f64
    ) {
        let spec = GridSpec {
            rabi_mw: mhz(w),
            mod_rf: mhz(m),
            sim: short(3.0, 1e-3),
            ..GridSpec::desk_default()
        };
        let plus = evaluate_cell(&spec, mhz(rf), mhz(d)).unwrap();
        let minus = evaluate_cell(&spec, mhz(rf), mhz(-d)).unwrap();
        prop_assert!((plus - minus).abs() < 1e-6, "{plus} {minus}");
    }

    #[test]
    fn floquet_converged_in_truncation(m in rwa()) {
        let t = (2.0 * m.mod_rf / m.omega_rf).ceil() as usize + 10;
        let a = floquet_quasienergies(&m, t).unwrap();
        let b = floquet_quasienergies(&m, t + 10).unwrap();
        prop_assert!((a.gap() - b.gap()).abs() < 1e-8);
        for k in 0..2 {
            prop_assert!((a.quasienergies[k] - b.quasienergies[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn floquet_gap_closes_at_cdt_points(mod_rf_mhz in 3.0..20.0f64, k in 0usize..3) {
        let omega = cdt_missing_resonances(0, mhz(mod_rf_mhz), 3).unwrap()[k];
        let rabi = omega / 20.0;
        let m = RwaModel::new(0.0, rabi, mhz(mod_rf_mhz), omega, 0.0).unwrap();
        let t = (2.0 * m.mod_rf / m.omega_rf).ceil() as usize + 15;
        let gap = floquet_quasienergies(&m, t).unwrap().gap();
        prop_assert!(gap <= 0.02 * rabi, "gap {gap} vs Ω_MW {rabi}");
    }

    #[test]
    fn spectrum_csv_round_trips(
        rows in 1usize..5, cols in 1usize..6, seed in prop::collection::vec(0.0..1.0f64, 30)
    ) {
        let rf: Vec<f64> = (0..rows).map(|i| mhz(1.0 + 0.37 * i as f64)).collect();
        let mw: Vec<f64> = (0..cols).map(|j| mhz(-3.0 + 1.3 * j as f64)).collect();
        let signal = seed[..rows * cols].to_vec();
        let grid = SpectrumGrid::new(rf, mw, signal).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&grid, &mut buf).unwrap();
        let back = read_spectrum_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(&back.signal, &grid.signal);
        let mut again = Vec::new();
        write_spectrum_csv(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn row_normalized_rows_have_unit_mean(rows in 1usize..5, cols in 1usize..8, seed in prop::collection::vec(0.01..1.0f64, 40)) {
        let rf: Vec<f64> = (0..rows).map(|i| 1.0 + i as f64).collect();
        let mw: Vec<f64> = (0..cols).map(|j| j as f64).collect();
        let grid = SpectrumGrid::new(rf, mw, seed[..rows * cols].to_vec()).unwrap();
        let n = normalize_rows(&grid).unwrap();
        for i in 0..rows {
            let mean = n.row(i).iter().sum::<f64>() / cols as f64;
            prop_assert!((mean - 1.0).abs() < 1e-12);
        }
    }
}

fn small_grid(frame: Frame, geometry: Geometry) -> GridSpec {
    GridSpec {
        rf_axis: UniformAxis::new(mhz(3.0), mhz(9.0), 3).unwrap(),
        mw_axis: UniformAxis::new(mhz(-10.0), mhz(10.0), 5).unwrap(),
        frame,
        geometry,
        phases: 4,
        sim: short(1.0, 1e-4),
        ..GridSpec::desk_default()
    }
}

#[test]
fn spectrum_is_bit_identical_across_thread_counts() {
    for (frame, geometry) in [(Frame::Rwa, Geometry::MwXRfZ), (Frame::Lab, Geometry::MwXRfX)] {
        let spec = small_grid(frame, geometry);
        let one = compute_spectrum_with_threads(&spec, 1).unwrap();
        let three = compute_spectrum_with_threads(&spec, 3).unwrap();
        let default = compute_spectrum(&spec).unwrap();
        let bits = |g: &SpectrumGrid| g.signal.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&one), bits(&three));
        assert_eq!(bits(&one), bits(&default));
        assert!(one.signal.iter().all(|&v| (0.0..=1.0 + 1e-9).contains(&v)));
    }
}

#[test]
fn doubling_phases_barely_moves_lab_cells() {
    let spec = GridSpec {
        frame: Frame::Lab,
        sim: SimConfig { t_total: 20.0, ..SimConfig::default() },
        ..GridSpec::desk_default()
    };
    let doubled = GridSpec { phases: 2 * spec.phases, ..spec };
    for (rf, d) in [(5.0, 0.0), (5.0, 5.0), (5.0, -10.0), (3.0, 2.0), (12.0, -12.0)] {
        let a = evaluate_cell(&spec, mhz(rf), mhz(d)).unwrap();
        let b = evaluate_cell(&doubled, mhz(rf), mhz(d)).unwrap();
        assert!((a - b).abs() < 1e-3, "cell ({rf}, {d}): {a} vs {b}");
    }
}
