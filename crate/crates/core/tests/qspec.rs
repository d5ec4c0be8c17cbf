use std::f64::consts::PI;

use aquid_core::qspec::*;
use aquid_core::tmdyn::{FastModel, JunctionCurrentParams, ParamCurve};
use aquid_core::Error;
use proptest::prelude::*;
use serde_json::Value;

const GOLDEN: &str = include_str!("../../../oracles/qspec_golden.json");

fn golden() -> Value {
    serde_json::from_str(GOLDEN).unwrap()
}

fn model(row: &Value) -> FastModel {
    let jp = JunctionCurrentParams {
        i0_per_n: row["i0_per_n"].as_f64().unwrap(),
        alpha0: row["alpha0"].as_f64().unwrap(),
    };
    FastModel::from_currents(
        &jp,
        row["u_eff"].as_f64().unwrap(),
        row["p_eff_half"].as_f64().unwrap(),
        row["n_atoms"].as_f64().unwrap(),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn k0_spectrum(row: &Value, count: usize) -> QSpectrum {
    let h = build_matrix(
        row["u_eff"].as_f64().unwrap(),
        0.0,
        row["p_eff_half"].as_f64().unwrap(),
        row["n_atoms"].as_f64().unwrap(),
        DEFAULT_N_MAX,
    )
    .unwrap();
    eigensolve(&h, count).unwrap()
}

#[test]
fn qubit_reports_match_dense_oracle() {
    let g = golden();
    for (name, row) in g["rows"].as_object().unwrap() {
        let r = qubit_report(&model(row), &QubitOptions::default()).unwrap();
        let want = |k: &str| row[k].as_f64().unwrap();
        let checks = [
            ("q", r.q, want("q"), 1e-12),
            ("Q", r.quality, want("quality"), 1e-6),
            ("T", r.t_osc_s, want("t_osc_s"), 1e-6),
            ("T asym", r.t_osc_asymptotic_s, want("t_osc_asymptotic_s"), 1e-12),
            ("c01", r.cos_element_01, want("cos_element_01"), 1e-9),
            ("dfpp", r.delta_f_pp_over_f0, want("delta_f_pp_over_f0"), 1e-5),
            ("dfeqd", r.delta_f_eqd_over_f0, want("delta_f_eqd_over_f0"), 1e-5),
            ("Q dfpp", r.product_q_dfpp, want("product_q_dfpp"), 1e-5),
            ("Ip", r.i_p_per_n, want("i_p_per_n"), 1e-5),
            ("Ip analytic", r.i_p_analytic_per_n, want("i_p_analytic_per_n"), 1e-8),
        ];
        for (what, got, exp, tol) in checks {
            assert!(rel(got, exp) < tol, "{name} {what}: {got} vs {exp}");
        }
        assert!((r.centre_f_over_f0 - 0.5).abs() < 1e-15, "{name}");
    }
}

#[test]
fn mathieu_values_and_labels() {
    let g = golden();
    for (q, rows) in g["mathieu"].as_object().unwrap() {
        let q: f64 = q.parse().unwrap();
        let got = mathieu_characteristics(q, 8).unwrap();
        for ((a, label), want) in got.iter().zip(rows.as_array().unwrap()) {
            let name = match label {
                MathieuLabel::Ce(m) => format!("ce{m}"),
                MathieuLabel::Se(m) => format!("se{m}"),
            };
            assert_eq!(name, want[0].as_str().unwrap(), "q = {q}");
            let w = want[1].as_f64().unwrap();
            assert!((a - w).abs() < 1e-9 * w.abs().max(1.0), "q = {q} {name}: {a} vs {w}");
        }
    }
}

#[test]
fn free_rotor_labels_follow_integer_ladder() {
    let got = mathieu_characteristics(0.0, 5).unwrap();
    for ((a, _), want) in got.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
        assert!((a - want).abs() < 1e-12, "{a} vs {want}");
    }
}

#[test]
fn parity_is_exact_at_zero_coupling() {
    let g = golden();
    for row in g["rows"].as_object().unwrap().values() {
        let s = k0_spectrum(row, 8);
        for j in 0..8 {
            let d = momentum_distribution(&s, j).unwrap();
            let wrong = if j % 4 == 0 || j % 4 == 3 { d.odd_weight } else { d.even_weight };
            assert!(wrong < 1e-10, "level {j}: wrong-parity weight {wrong}");
        }
    }
}

#[test]
fn parity_mixes_off_centre() {
    let g = golden();
    let m = model(&g["rows"]["r800_n4500"]);
    let s = spectrum_at(&m, 0.5005, DEFAULT_N_MAX, 2).unwrap();
    let d = momentum_distribution(&s, 0).unwrap();
    assert!(d.even_weight > 0.1 && d.odd_weight > 0.1, "{d:?}");
}

fn mass_near(f: impl Fn(f64) -> f64, centre: f64) -> f64 {
    let n = 4000;
    let dphi = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| -PI + (i as f64 + 0.5) * dphi)
        .filter(|phi| ((phi - centre + PI).rem_euclid(2.0 * PI) - PI).abs() < PI / 2.0)
        .map(|phi| f(phi) * dphi)
        .sum()
}

#[test]
fn persistent_states_localize_in_opposite_wells() {
    let g = golden();
    for name in ["r385", "r800_n4500"] {
        let s = k0_spectrum(&g["rows"][name], 2);
        let p = persistent_states(&s).unwrap();
        let minus = mass_near(|phi| p.psi_minus(phi).norm_sqr(), 0.0);
        let plus = mass_near(|phi| p.psi_plus(phi).norm_sqr(), PI);
        assert!(minus > 0.9 && plus > 0.9, "{name}: {minus} {plus}");
    }
}

#[test]
fn persistent_states_need_zero_coupling() {
    let h = build_matrix(0.01, 1e-5, -1e-4, 3000.0, 32).unwrap();
    let s = eigensolve(&h, 4).unwrap();
    assert!(matches!(persistent_states(&s), Err(Error::Domain(_))));
}

#[test]
fn eigenpairs_have_small_residuals() {
    let h = build_matrix(0.0117, 2e-6, -7.2e-4, 3000.0, 32).unwrap();
    let s = eigensolve(&h, 8).unwrap();
    let full = PhaseHamiltonian { n_max: s.n_max, ..h };
    let nm = s.n_max as i64;
    let norm = full.matrix().norm_l2();
    for (e, v) in s.energies.iter().zip(&s.vectors) {
        let r: f64 = (-nm..=nm)
            .map(|n| {
                let hv: f64 = (-nm..=nm).map(|m| full.element(n, m) * v[(m + nm) as usize]).sum();
                (hv - e * v[(n + nm) as usize]).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        assert!(r < 1e-10 * norm, "residual {r}");
    }
}

#[test]
fn doubling_cutoff_leaves_levels_unchanged() {
    let h = build_matrix(0.0061, 0.0, -1.41e-5, 4500.0, 16).unwrap();
    let a = eigensolve(&h, 8).unwrap();
    let b = eigensolve(&build_matrix(0.0061, 0.0, -1.41e-5, 4500.0, 128).unwrap(), 8).unwrap();
    for (x, y) in a.energies.iter().zip(&b.energies) {
        assert!((x - y).abs() < 1e-10 * y.abs().max(0.0061));
    }
}

#[test]
fn small_cutoff_rejected() {
    assert!(matches!(build_matrix(0.01, 0.0, -1e-4, 3000.0, 11), Err(Error::Domain(_))));
}

#[test]
fn block_reduction_reproduces_full_pair() {
    let g = golden();
    let row = &g["rows"]["r800_n4500"];
    let m = model(row);
    let s0 = k0_spectrum(row, 8);
    let f = 0.50005;
    let b = block_reduction(&s0, m.k(f), m.n_atoms()).unwrap();
    // P_eff is held at its f₀/2 value in the reduction
    let full = eigensolve(&build_matrix(m.u_eff(), m.k(f), s0.p_eff, m.n_atoms(), DEFAULT_N_MAX).unwrap(), 2).unwrap();
    let gap = full.energies[1] - full.energies[0];
    let pair = b.pairs[0];
    assert!(rel(pair.e_upper - pair.e_lower, gap) < 0.02, "{} vs {gap}", pair.e_upper - pair.e_lower);
    assert!(b.decoupling_ratio < MAX_DECOUPLING_RATIO);
}

#[test]
fn block_reduction_rejects_strong_coupling() {
    let g = golden();
    let row = &g["rows"]["r800_n4500"];
    let s0 = k0_spectrum(row, 8);
    assert!(matches!(block_reduction(&s0, 1e-5, 4500.0), Err(Error::Domain(_))));
}

#[test]
fn ground_state_favours_zero_well_below_centre() {
    let g = golden();
    let row = &g["rows"]["r800_n4500"];
    let s0 = k0_spectrum(row, 8);
    let m = model(row);
    let b = block_reduction(&s0, m.k(0.4999), m.n_atoms()).unwrap();
    assert!(b.pairs[0].a > std::f64::consts::FRAC_1_SQRT_2);
    let b = block_reduction(&s0, m.k(0.5001), m.n_atoms()).unwrap();
    assert!(b.pairs[0].a < std::f64::consts::FRAC_1_SQRT_2);
}

#[test]
fn level_currents_vanish_at_centre() {
    let g = golden();
    let m = model(&g["rows"]["r800_n4500"]);
    let f: Vec<f64> = (-20..=20).map(|i| 0.5 + 2e-5 * i as f64).collect();
    let spectra = spectra_on_grid(&m, &f, DEFAULT_N_MAX, 8).unwrap();
    let lc = level_currents(&spectra, CURRENT_LEVELS).unwrap();
    for c in &lc.currents {
        assert!(c[20].abs() < 1e-6, "{}", c[20]);
    }
}

#[test]
fn finite_difference_currents_match_exact_derivative() {
    let g = golden();
    let m = model(&g["rows"]["r800_n4000"]);
    let f: Vec<f64> = (0..41).map(|i| 0.3 + 0.005 * i as f64).collect();
    let spectra = spectra_on_grid(&m, &f, DEFAULT_N_MAX, 8).unwrap();
    let lc = level_currents(&spectra, 2).unwrap();
    // away from the avoided crossings near f₀/2
    for i in 1..30 {
        let exact = level_current_exact(&m, &spectra[i], 0).unwrap();
        assert!((lc.currents[0][i] - exact).abs() < 2e-3 * 0.01722, "f = {}", f[i]);
    }
}

#[test]
fn tied_overlaps_are_reported() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mk = |f: f64, vectors: Vec<Vec<f64>>| QSpectrum {
        f_over_f0: Some(f),
        u_eff: 1.0,
        k: 0.1,
        p_eff: -0.1,
        n_atoms: 1.0,
        n_max: 1,
        energies: vec![0.0, 1.0, 2.0],
        vectors,
        classes: vec![
            LevelClass {
                symmetric: true,
                even_n: None
            };
            3
        ],
    };
    let e = |i: usize| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>();
    let spectra = vec![
        mk(0.0, vec![e(0), e(1), e(2)]),
        mk(0.1, vec![vec![s, s, 0.0], vec![s, -s, 0.0], e(2)]),
        mk(0.2, vec![e(0), e(1), e(2)]),
    ];
    assert!(matches!(level_currents(&spectra, 1), Err(Error::AmbiguousTracking { .. })));
}

#[test]
fn asymptotic_gap_tends_to_exact() {
    for q in [10.0, 30.0] {
        let a = mathieu_characteristics(q, 2).unwrap();
        assert!(rel(asymptotic_gap(q), a[1].0 - a[0].0) < 2.0 / q.sqrt());
    }
}

#[test]
fn spectrum_files_have_expected_headers() {
    let g = golden();
    let m = model(&g["rows"]["r800_n4000"]);
    let f: Vec<f64> = (0..5).map(|i| 0.49 + 0.005 * i as f64).collect();
    let spectra = spectra_on_grid(&m, &f, DEFAULT_N_MAX, SPECTRUM_LEVELS).unwrap();
    let lc = level_currents(&spectra, CURRENT_LEVELS).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_spectrum_csv(dir.path().join("s.csv"), &spectra).unwrap();
    write_levels_currents_csv(dir.path().join("l.csv"), &lc).unwrap();
    let s = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let l = std::fs::read_to_string(dir.path().join("l.csv")).unwrap();
    assert!(s.starts_with("f_over_f0,E0_nK,E1_nK,E2_nK,E3_nK,E4_nK,E5_nK,E6_nK,E7_nK\n"));
    assert!(l.starts_with("f_over_f0,I0_perN,I1_perN,I2_perN,I3_perN,I4_perN\n"));
    assert_eq!(s.lines().count(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_even_in_coupling(u in 0.002f64..0.02, k in 1e-7f64..1e-4, p in -1e-3f64..-1e-6, n in 1000.0f64..5000.0) {
        let a = eigensolve(&build_matrix(u, k, p, n, 32).unwrap(), 6).unwrap();
        let b = eigensolve(&build_matrix(u, -k, p, n, 32).unwrap(), 6).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            prop_assert!((x - y).abs() < 1e-11 * x.abs().max(u));
        }
    }

    #[test]
    fn zero_coupling_spectrum_depends_on_q_only(q in 0.05f64..15.0, u in 0.002f64..0.02, n in 1000.0f64..5000.0) {
        let s = eigensolve(&build_matrix(u, 0.0, -8.0 * q * u / n, n, 32).unwrap(), 6).unwrap();
        let a = mathieu_characteristics(q, 6).unwrap();
        for (e, (ref_a, _)) in s.energies.iter().zip(&a) {
            prop_assert!((e / u - ref_a).abs() < 1e-9 * ref_a.abs().max(1.0));
        }
    }

    #[test]
    fn weights_bounded(de in 1e-6f64..1.0, c in -10.0f64..10.0) {
        let a = superposition_coefficient(de, c * de);
        prop_assert!(a > 0.0 && a <= 1.0);
        let (i0, i1) = mean_currents(a, 1.0);
        prop_assert!(i0.abs() <= 1.0 + 1e-12 && (i0 + i1).abs() < 1e-15);
    }
}
