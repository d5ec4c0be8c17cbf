use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;
use std::sync::OnceLock;

use aquid_core::gbh::{gbh_integrals, k_from_energy_split, localized_modes};
use aquid_core::gp2d::*;
use aquid_core::{load_scenario_file, ScenarioConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(n: usize) -> ScenarioConfig {
    load_scenario_file(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/r385.toml"))
        .unwrap()
        .with_grid(n)
}

struct Pair {
    cfg: ScenarioConfig,
    sys: GpSystem,
    zero: StationaryState,
    pi: StationaryState,
}

/// Ω = 0 stationary pair on a 65² grid, shared across tests.
fn pair() -> &'static Pair {
    static PAIR: OnceLock<Pair> = OnceLock::new();
    PAIR.get_or_init(|| {
        let cfg = cfg(65);
        let sys = GpSystem::new(&cfg);
        let opts = RelaxOptions::from_config(&cfg);
        let zero = zero_state(&sys, &cfg, 0.0, None, &opts, true).unwrap();
        let pi = pi_state(&sys, &cfg, 0.0, None, &opts, false).unwrap();
        Pair { cfg, sys, zero, pi }
    })
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn period_of_noisy_sine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // uniform noise with standard deviation 0.05
    let a = 0.05 * 3f64.sqrt();
    let t: Vec<f64> = (0..4000).map(|i| i as f64 / 100.0).collect();
    let v: Vec<f64> = t
        .iter()
        .map(|&t| (2.0 * PI * t / 5.0).sin() + rng.gen_range(-a..a))
        .collect();
    let p = period_estimate(&t, &v).unwrap();
    assert!((p - 5.0).abs() < 0.05, "{p}");
}

#[test]
fn real_time_preserves_norm() {
    let cfg = cfg(65);
    let sys = GpSystem::new(&cfg);
    let mut psi = winding_seed(&cfg, &sys.grid, 1, 10.0).psi;
    let n0 = norm2(&sys.grid, &psi);
    let dt = sys.stable_real_dt(cfg.numerics.dt_real_s);
    SplitStep::new(&sys, 10.0, dt, TimeKind::Real).advance(&mut psi, 10_000);
    assert!((norm2(&sys.grid, &psi) - n0).abs() < 1e-6);
}

#[test]
fn real_time_conserves_energy() {
    let p = pair();
    let modes = localized_modes(&p.zero, &p.pi).unwrap();
    let init = two_mode_state(&modes, 0.01, 0.0, 0.0).unwrap();
    let dt = p.sys.stable_real_dt(p.cfg.numerics.dt_real_s);
    let e0 = p.sys.energy_per_particle(&init.psi, 0.0);
    let mut worst = 0.0_f64;
    let opts = EvolveOptions::new(dt, 3000.0 * dt, 100);
    evolve_real(&p.sys, &init, 0.0, &opts, |_, _, e| {
        worst = worst.max(((e - e0) / e0).abs());
        Ok(true)
    })
    .unwrap();
    assert!(worst < 1e-4, "{worst:.2e}");
}

#[test]
fn stationary_state_stays_put() {
    let p = pair();
    let dt = p.sys.stable_real_dt(p.cfg.numerics.dt_real_s);
    let mut psi = p.zero.psi.psi.clone();
    SplitStep::new(&p.sys, 0.0, dt, TimeKind::Real).advance(&mut psi, 1000);
    // a stationary state only acquires the global phase e^{−iμt/ħ}
    let overlap = inner(&p.sys.grid, &p.zero.psi.psi, &psi).norm();
    assert!(1.0 - overlap < 1e-6, "{}", 1.0 - overlap);
}

/// Largest relative energy rise between consecutive relaxation steps.
fn worst_energy_rise(cfg: &ScenarioConfig, sys: &GpSystem, dt: f64, steps: usize) -> f64 {
    let mut psi = winding_seed(cfg, &sys.grid, 0, 0.0).psi;
    let mut step = SplitStep::new(sys, 0.0, dt, TimeKind::Imaginary);
    let mut e = sys.energy_per_particle(&psi, 0.0);
    let mut worst = 0.0_f64;
    for _ in 0..steps {
        step.relax_step(&mut psi, None);
        let next = sys.energy_per_particle(&psi, 0.0);
        worst = worst.max((next - e) / e.abs());
        e = next;
    }
    worst
}

#[test]
fn imaginary_time_lowers_energy() {
    let cfg = cfg(65);
    let sys = GpSystem::new(&cfg);
    assert!(worst_energy_rise(&cfg, &sys, 1e-6, 300) <= 0.0);
}

#[test]
fn late_relaxation_rises_shrink_with_step_cubed() {
    // near convergence the splitting error shows up as tiny O(dt³) rises
    let cfg = cfg(65);
    let sys = GpSystem::new(&cfg);
    let coarse = worst_energy_rise(&cfg, &sys, 1e-5, 400);
    let fine = worst_energy_rise(&cfg, &sys, 5e-6, 800);
    assert!(coarse < 1e-6, "{coarse:e}");
    assert!(fine < coarse / 4.0, "{fine:e} vs {coarse:e}");
}

#[test]
fn rotation_terms_vanish_without_rotation() {
    let p = pair();
    // real state: T + V keeps it real; the −ΩL_z term does not
    let psi: Vec<Complex64> = p.zero.psi.psi.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
    let h0 = p.sys.apply_h0(&psi, 0.0);
    let scale = max_abs(&h0);
    assert!(h0.iter().map(|v| v.im.abs()).fold(0.0, f64::max) < 1e-12 * scale);
    let h1 = p.sys.apply_h0(&psi, 5.0);
    assert!(h1.iter().map(|v| v.im.abs()).fold(0.0, f64::max) > 1e-6 * scale);
    // and the rotation part is linear in Ω
    let h2 = p.sys.apply_h0(&psi, 10.0);
    let d1: Vec<Complex64> = h1.iter().zip(&h0).map(|(a, b)| a - b).collect();
    let d2: Vec<Complex64> = h2.iter().zip(&h0).map(|(a, b)| (a - b) * 0.5).collect();
    assert!(max_diff(&d1, &d2) < 1e-10 * scale);
}

#[test]
fn halving_relaxation_step_changes_little() {
    let base = cfg(65);
    let mut fine = base.clone();
    fine.numerics.dt_imag_s *= 0.5;
    let run = |cfg: &ScenarioConfig| {
        let sys = GpSystem::new(cfg);
        zero_state(&sys, cfg, 0.0, None, &RelaxOptions::from_config(cfg), true).unwrap()
    };
    let (a, b) = (run(&base), run(&fine));
    assert!(((a.mu - b.mu) / b.mu).abs() < 1e-3, "{} vs {}", a.mu, b.mu);
    let (ea, eb) = (a.energy_per_particle, b.energy_per_particle);
    assert!(((ea - eb) / eb).abs() < 1e-3, "{ea} vs {eb}");
}

#[test]
fn linear_problem_has_mu_equal_energy() {
    let cfg = cfg(65);
    let sys = GpSystem::with_coupling(&cfg, 0.0);
    let s = zero_state(&sys, &cfg, 0.0, None, &RelaxOptions::from_config(&cfg), true).unwrap();
    assert!((s.mu - s.energy_per_particle).abs() < 1e-10 * s.mu.abs());
}

#[test]
fn stationary_pair_is_orthogonal_and_labelled() {
    let p = pair();
    assert!(inner(&p.sys.grid, &p.zero.psi.psi, &p.pi.psi.psi).norm() < 1e-6);
    assert_eq!(p.zero.phase_label, PhaseLabel::Zero);
    assert_eq!(p.pi.phase_label, PhaseLabel::Pi);
    assert_eq!(p.zero.winding, 0);
    assert!(p.zero.residual < p.cfg.numerics.convergence_tol);
    assert!(p.pi.residual < p.cfg.numerics.convergence_tol);
    assert!((p.zero.psi.norm2() - 1.0).abs() < 1e-8);
}

#[test]
fn localized_modes_reconstruct_stationary_states() {
    let p = pair();
    let modes = localized_modes(&p.zero, &p.pi).unwrap();
    modes.check_orthonormal(1e-6).unwrap();
    let back: Vec<Complex64> = modes
        .upper
        .iter()
        .zip(&modes.lower)
        .map(|(u, l)| (u + l) * FRAC_1_SQRT_2)
        .collect();
    assert!(max_diff(&back, &p.zero.psi.psi) < 1e-10 * max_abs(&back));

    let zero = two_mode_state(&modes, 0.0, 0.0, 0.0).unwrap();
    assert!(max_diff(&zero.psi, &p.zero.psi.psi) < 1e-10 * max_abs(&zero.psi));
    let pi = two_mode_state(&modes, 0.0, PI, 0.0).unwrap();
    assert!(1.0 - inner(&p.sys.grid, &pi.psi, &p.pi.psi.psi).norm() < 1e-10);

    assert!(phase_difference(&p.zero.psi.psi, &modes).unwrap().abs() < 1e-10);
    assert!((phase_difference(&p.pi.psi.psi, &modes).unwrap().abs() - PI).abs() < 1e-10);
    let third = two_mode_state(&modes, 0.0, PI / 3.0, 0.0).unwrap();
    assert!((phase_difference(&third.psi, &modes).unwrap() - PI / 3.0).abs() < 1e-12);
    let proj = tm_projection(&third.psi, &modes);
    assert!((proj.subspace_norm2 - 1.0).abs() < 1e-10);
}

#[test]
fn real_state_carries_no_cut_current() {
    let p = pair();
    let psi: Vec<Complex64> = p.zero.psi.psi.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
    for seg in [CutSegment::Full, CutSegment::Left, CutSegment::Right] {
        assert!(cut_current(&p.sys, &psi, 0.0, seg).abs() < 1e-12);
    }
}

#[test]
fn slow_rotation_drives_clockwise_zero_state_current() {
    let p = pair();
    let omega = 2.0 * PI * 0.05 * 7.9;
    let opts = RelaxOptions::from_config(&p.cfg);
    let s = zero_state(&p.sys, &p.cfg, omega, Some(&p.zero.psi), &opts, true).unwrap();
    assert!(cut_current(&p.sys, &s.psi.psi, omega, CutSegment::Right) < 0.0);
}

#[test]
fn mode_integrals_are_consistent_with_energy_split() {
    let p = pair();
    let modes = localized_modes(&p.zero, &p.pi).unwrap();
    let ig = gbh_integrals(&modes, &p.sys, p.cfg.n(), 0.0).unwrap();
    let k_split = k_from_energy_split(p.zero.energy_per_particle, p.pi.energy_per_particle);
    assert!(((ig.k - k_split) / k_split).abs() < 0.02, "{} vs {k_split}", ig.k);
    assert!(ig.u > 0.0 && ig.k > 0.0);
    let ratio = ig.p_prime / ig.p.abs();
    assert!((0.2..5.0).contains(&ratio), "{ratio}");
    let nu = p.cfg.n() * ig.u;
    assert!(nu > 100.0 * ig.k.abs().max(ig.p.abs()));
}
