use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{half_turn_parity, inner, mirror_y_conj, normalize, project_half_turn, Grid2D};
use super::state::{pointwise_phase, winding_number, OrderParameter, PhaseLabel, StationaryState};
use super::system::{transpose, Energetics, GpSystem, SplitStep, TimeKind};
use crate::error::{Error, Result};
use crate::units::ScenarioConfig;

/// Tolerance on |φ| or ||φ| − π| for the zero/π labels.
pub const PHASE_LABEL_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// No symmetry constraint.
    Free,
    /// Keep the half-turn parity of the initial state.
    FromInitial,
    Even,
    Odd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxOptions {
    /// Imaginary-time step (s).
    pub dt: f64,
    pub max_imaginary_steps: usize,
    pub check_every: usize,
    /// Hand over to the gradient polish below this relative residual.
    pub handoff_residual: f64,
    /// Required ‖Hψ − μψ‖/|μ|.
    pub residual_tol: f64,
    /// Required relative energy decay rate |dE/dτ|/|E| (s⁻¹) under the
    /// exact imaginary-time flow.
    pub energy_rate_tol: f64,
    pub max_polish: usize,
    pub sector: Sector,
}

impl RelaxOptions {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        RelaxOptions {
            dt: cfg.numerics.dt_imag_s,
            max_imaginary_steps: 200,
            check_every: 100,
            handoff_residual: 2e-3,
            residual_tol: cfg.numerics.convergence_tol,
            energy_rate_tol: 1e-10,
            max_polish: 20_000,
            sector: Sector::FromInitial,
        }
    }
}

fn parity_of(sector: Sector, init: &[Complex64]) -> Option<i32> {
    match sector {
        Sector::Free => None,
        Sector::FromInitial => Some(half_turn_parity(init)),
        Sector::Even => Some(1),
        Sector::Odd => Some(-1),
    }
}

/// Relative decay rate 2‖r‖²/(ħ|E|) of the normalized imaginary-time flow.
fn energy_rate(sys: &GpSystem, res_abs: f64, energy: f64) -> f64 {
    2.0 * res_abs * res_abs / (sys.hbar() * energy.abs().max(f64::MIN_POSITIVE))
}

fn residual_vec(e: &Energetics, psi: &[Complex64]) -> Vec<Complex64> {
    e.hpsi.iter().zip(psi).map(|(h, p)| h - p * e.mu).collect()
}

/// Imaginary-time relaxation followed by a preconditioned conjugate-gradient
/// polish on the normalization sphere.
///
/// The split-step stage removes the bulk of excited components; its fixed
/// point carries an O(dt²) splitting bias, which the polish (driven by the
/// exact discrete Hamiltonian) removes.
pub fn relax_imaginary(
    sys: &GpSystem,
    cfg: &ScenarioConfig,
    init: &OrderParameter,
    omega: f64,
    opts: &RelaxOptions,
) -> Result<StationaryState> {
    let grid = &sys.grid;
    let mut psi = init.psi.clone();
    let parity = parity_of(opts.sector, &psi);
    if let Some(p) = parity {
        project_half_turn(&mut psi, p);
    }
    normalize(grid, &mut psi);

    let mut steps = 0;
    if opts.max_imaginary_steps > 0 {
        let mut prop = SplitStep::new(sys, omega, opts.dt, TimeKind::Imaginary);
        while steps < opts.max_imaginary_steps {
            let chunk = opts.check_every.min(opts.max_imaginary_steps - steps);
            for _ in 0..chunk {
                prop.relax_step(&mut psi, parity);
            }
            steps += chunk;
            let (r, mu) = sys.residual(&psi, omega);
            if r / mu.abs() < opts.handoff_residual {
                break;
            }
        }
    }

    let (iters, res_abs, e) = polish(sys, &mut psi, omega, parity, opts)?;
    let rel = res_abs / e.mu.abs();
    let rate = energy_rate(sys, res_abs, e.energy);
    if rel > opts.residual_tol || rate > opts.energy_rate_tol {
        return Err(Error::NoConvergence {
            steps: steps + iters,
            residual: rel,
            energy_rate: rate,
        });
    }

    if let Some(p) = parity {
        fix_phase_convention(grid, &mut psi, p, cfg.r0());
    }
    let phase = pointwise_phase(grid, &psi, cfg.r0());
    Ok(StationaryState {
        winding: winding_number(grid, &psi, cfg.r0()),
        phase_label: PhaseLabel::from_phase(phase, PHASE_LABEL_TOL),
        phase_estimate: phase,
        mu: e.mu,
        energy_per_particle: e.energy,
        residual: rel,
        imaginary_steps: steps,
        polish_iterations: iters,
        psi: OrderParameter {
            grid: grid.clone(),
            psi,
            omega,
        },
    })
}

/// P = 1/(C k² + s), applied in 2D Fourier space.
fn precondition(sys: &GpSystem, v: &[Complex64], shift: f64) -> Vec<Complex64> {
    let n = sys.grid.n;
    let k = sys.wavenumbers();
    let c = sys.c_kin();
    let mut a = v.to_vec();
    let mut b = vec![Complex64::new(0.0, 0.0); a.len()];
    sys.fft_rows(&mut a, true);
    transpose(&a, &mut b, n);
    sys.fft_rows(&mut b, true);
    let scale = 1.0 / (n * n) as f64;
    for ix in 0..n {
        for iy in 0..n {
            let kk = k[ix] * k[ix] + k[iy] * k[iy];
            b[ix * n + iy] *= scale / (c * kk + shift);
        }
    }
    sys.fft_rows(&mut b, false);
    transpose(&b, &mut a, n);
    sys.fft_rows(&mut a, false);
    a
}

fn remove_component(v: &mut [Complex64], psi: &[Complex64], grid: &Grid2D) {
    let c = inner(grid, psi, v);
    v.iter_mut().zip(psi).for_each(|(x, p)| *x -= p * c);
}

fn retract(grid: &Grid2D, psi: &[Complex64], d: &[Complex64], alpha: f64) -> (Vec<Complex64>, f64) {
    let mut out: Vec<Complex64> = psi.iter().zip(d).map(|(p, q)| p + q * alpha).collect();
    let s = super::grid::norm2(grid, &out).sqrt();
    out.iter_mut().for_each(|v| *v /= s);
    (out, s)
}

/// Polak–Ribière preconditioned CG on the unit sphere with a secant line
/// search on the directional derivative.
fn polish(
    sys: &GpSystem,
    psi: &mut Vec<Complex64>,
    omega: f64,
    parity: Option<i32>,
    opts: &RelaxOptions,
) -> Result<(usize, f64, Energetics)> {
    let grid = &sys.grid;
    let shift = 0.5 * sys.potential.iter().cloned().fold(0.0, f64::max).max(1.0);
    let mut e = sys.energetics(psi, omega);
    let mut r = residual_vec(&e, psi);
    let mut g_prev: Option<(Vec<Complex64>, f64)> = None;
    let mut d: Vec<Complex64> = Vec::new();
    let mut alpha = 0.5;

    for it in 0..=opts.max_polish {
        let res_abs = super::grid::norm2(grid, &r).sqrt();
        if res_abs / e.mu.abs() <= opts.residual_tol && energy_rate(sys, res_abs, e.energy) <= opts.energy_rate_tol {
            return Ok((it, res_abs, e));
        }
        if it == opts.max_polish {
            return Ok((it, res_abs, e));
        }

        let mut g = precondition(sys, &r, shift);
        if let Some(p) = parity {
            project_half_turn(&mut g, p);
        }
        remove_component(&mut g, psi, grid);
        let rg = inner(grid, &r, &g).re;

        let beta = match &g_prev {
            Some((gp, rgp)) if it % 50 != 0 => {
                let num: f64 = r
                    .iter()
                    .zip(g.iter().zip(gp))
                    .map(|(ri, (gi, gpi))| (ri.conj() * (gi - gpi)).re)
                    .sum::<f64>()
                    * grid.cell_area();
                (num / rgp).max(0.0)
            }
            _ => 0.0,
        };
        if beta == 0.0 || d.is_empty() {
            d = g.iter().map(|v| -v).collect();
        } else {
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi + *di * beta);
            remove_component(&mut d, psi, grid);
        }
        if let Some(p) = parity {
            project_half_turn(&mut d, p);
        }
        let mut slope = 2.0 * inner(grid, &r, &d).re;
        if slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -2.0 * rg;
        }
        g_prev = Some((g, rg));

        // secant on the directional derivative, with energy safeguard
        let (trial, s_t) = retract(grid, psi, &d, alpha);
        let e_t = sys.energetics(&trial, omega);
        let r_t = residual_vec(&e_t, &trial);
        let slope_t = 2.0 * inner(grid, &r_t, &d).re / s_t;
        let mut a_star = if slope_t > slope {
            alpha * slope / (slope - slope_t)
        } else {
            4.0 * alpha
        };
        a_star = a_star.clamp(0.1 * alpha, 4.0 * alpha);
        let (cand, _) = retract(grid, psi, &d, a_star);
        let e_c = sys.energetics(&cand, omega);
        let tol = 1e-13 * e.energy.abs();
        let (accepted, e_new, a_new) = if e_c.energy <= e.energy + tol && e_c.energy <= e_t.energy + tol {
            (cand, e_c, a_star)
        } else if e_t.energy <= e.energy + tol {
            (trial, e_t, alpha)
        } else {
            // neither point improved; shrink and restart the direction
            alpha *= 0.25;
            g_prev = None;
            if alpha < 1e-12 {
                let res_abs = super::grid::norm2(grid, &r).sqrt();
                return Ok((it, res_abs, e));
            }
            continue;
        };
        *psi = accepted;
        if let Some(p) = parity {
            project_half_turn(psi, p);
            normalize(grid, psi);
        }
        e = e_new;
        r = residual_vec(&e, psi);
        alpha = a_new;
    }
    unreachable!()
}

/// Fix the global phase so that Ψ(x,−y) = ±Ψ*(x,y) (sign = half-turn parity)
/// and choose the overall sign so the lower half of the ring (0, −r₀) is
/// positive.
pub fn fix_phase_convention(grid: &Grid2D, psi: &mut [Complex64], parity: i32, r0: f64) {
    let n = grid.n;
    let mut c = Complex64::new(0.0, 0.0);
    for iy in 0..n {
        let a = &psi[iy * n..(iy + 1) * n];
        let b = &psi[(n - 1 - iy) * n..(n - iy) * n];
        c += a.iter().zip(b).map(|(u, v)| u * v).sum::<Complex64>();
    }
    let target = if parity >= 0 { 0.0 } else { std::f64::consts::PI };
    let rot = Complex64::from_polar(1.0, 0.5 * (target - c.arg()));
    psi.iter_mut().for_each(|v| *v *= rot);
    if grid.interpolate(psi, 0.0, -r0).re < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
    // remove round-off breaking of the antiunitary mirror symmetry
    let sign = if parity >= 0 { 1.0 } else { -1.0 };
    let m = mirror_y_conj(grid, psi);
    let dev: f64 = psi.iter().zip(&m).map(|(a, b)| (a - b * sign).norm_sqr()).sum::<f64>() * grid.cell_area();
    if dev.sqrt() < 1e-6 {
        psi.iter_mut().zip(&m).for_each(|(a, b)| *a = (*a + b * sign) * 0.5);
        normalize(grid, psi);
    }
}

/// Lowest half-turn-even state seeded without circulation; the zero-phase
/// stationary state. At f = f₀ it is degenerate with the winding-2 state and
/// its circulation along r₀ is ill-defined, so callers skip the winding check
/// there.
pub fn zero_state(
    sys: &GpSystem,
    cfg: &ScenarioConfig,
    omega: f64,
    warm: Option<&OrderParameter>,
    opts: &RelaxOptions,
    check_winding: bool,
) -> Result<StationaryState> {
    let init = match warm {
        Some(w) => w.clone(),
        None => super::state::winding_seed(cfg, &sys.grid, 0, omega),
    };
    let opts = RelaxOptions {
        sector: Sector::Even,
        ..opts.clone()
    };
    let s = relax_imaginary(sys, cfg, &init, omega, &opts)?;
    if s.phase_label != PhaseLabel::Zero || (check_winding && s.winding != 0) {
        return Err(Error::SectorEscape(format!(
            "zero state ended with winding {} and phase {:.4}",
            s.winding, s.phase_estimate
        )));
    }
    Ok(s)
}

/// Lowest half-turn-odd state seeded from a unit winding; the π stationary
/// state. At Ω = 0 the state is real with nodes on the barriers, so the
/// winding along r₀ is not meaningful there; callers skip the check.
pub fn pi_state(
    sys: &GpSystem,
    cfg: &ScenarioConfig,
    omega: f64,
    warm: Option<&OrderParameter>,
    opts: &RelaxOptions,
    check_winding: bool,
) -> Result<StationaryState> {
    let init = match warm {
        Some(w) => w.clone(),
        None => super::state::winding_seed(cfg, &sys.grid, 1, omega),
    };
    let opts = RelaxOptions {
        sector: Sector::Odd,
        ..opts.clone()
    };
    let s = relax_imaginary(sys, cfg, &init, omega, &opts)?;
    if s.phase_label != PhaseLabel::Pi || (check_winding && s.winding != 1) {
        return Err(Error::SectorEscape(format!(
            "π state ended with winding {} and phase {:.4}",
            s.winding, s.phase_estimate
        )));
    }
    Ok(s)
}
