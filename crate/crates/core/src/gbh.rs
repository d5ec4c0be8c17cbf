//! Two-mode (generalized Bose–Hubbard) parameters from stationary states:
//! localized junction modes, the K/U/P/P′ overlap integrals, and the
//! period-calibrated U_eff and P_eff.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp2d::{
    cycles_completed, illinois, inner, normalize, period_estimate, pi_state, tm_time_series, two_mode_state, wrap_phase,
    zero_state, EvolveOptions, GpSystem, RelaxOptions, StationaryState, TimeSample,
};
pub use crate::gp2d::LocalizedModes;
use crate::units::ScenarioConfig;

/// Largest |⟨Ψ₀,Ψ_π⟩| for which the localized modes are considered defined.
pub const MAX_STATE_OVERLAP: f64 = 1e-3;
/// Bound on imaginary residues relative to the integrand magnitude.
pub const MAX_IMAGINARY_RESIDUE: f64 = 1e-8;

/// ψ_u = (Ψ₀ − Ψ_π)/√2, ψ_l = (Ψ₀ + Ψ_π)/√2.
///
/// The relative phase of Ψ_π is chosen so that ψ_l carries the largest
/// weight below y = 0; with the mirror-symmetric phase convention of the
/// stationary states this is a sign choice.
pub fn localized_modes(s0: &StationaryState, spi: &StationaryState) -> Result<LocalizedModes> {
    let grid = &s0.psi.grid;
    if *grid != spi.psi.grid || s0.psi.omega != spi.psi.omega {
        return Err(Error::domain("stationary states live on different grids or frames"));
    }
    let a = &s0.psi.psi;
    let ov = inner(grid, a, &spi.psi.psi).norm();
    if ov > MAX_STATE_OVERLAP {
        return Err(Error::StatesOverlap(ov));
    }
    let n = grid.n;
    let c = grid.center();
    let da = grid.cell_area();
    let mut low = Complex64::new(0.0, 0.0);
    for iy in 0..=c {
        let w = if iy == c { 0.5 } else { 1.0 };
        let row = iy * n..(iy + 1) * n;
        low += a[row.clone()]
            .iter()
            .zip(&spi.psi.psi[row])
            .map(|(u, v)| u.conj() * v)
            .sum::<Complex64>()
            * w;
    }
    let rot = if low.norm() > 0.0 {
        Complex64::from_polar(1.0, -low.arg())
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut b: Vec<Complex64> = spi.psi.psi.iter().map(|v| v * rot).collect();
    let o = inner(grid, a, &b);
    b.iter_mut().zip(a).for_each(|(v, u)| *v -= u * o);
    normalize(grid, &mut b);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let upper: Vec<Complex64> = a.iter().zip(&b).map(|(u, v)| (u - v) * s).collect();
    let lower: Vec<Complex64> = a.iter().zip(&b).map(|(u, v)| (u + v) * s).collect();
    let centroid: f64 = (0..n)
        .map(|iy| grid.y(iy) * upper[iy * n..(iy + 1) * n].iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * da;
    if centroid <= 0.0 {
        return Err(Error::domain(format!("upper mode centroid at y = {centroid:.3e} µm")));
    }
    Ok(LocalizedModes {
        grid: grid.clone(),
        upper,
        lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbhIntegrals {
    /// Single-particle tunneling (nK).
    pub k: f64,
    /// On-site interaction (nK).
    pub u: f64,
    /// Pair tunneling (nK).
    pub p: f64,
    /// Neighbor interaction (nK).
    pub p_prime: f64,
}

fn check_real(name: &'static str, value: Complex64, magnitude: f64) -> Result<f64> {
    if value.im.abs() > MAX_IMAGINARY_RESIDUE * magnitude.max(value.re.abs()) {
        return Err(Error::ImaginaryResidue {
            name,
            re: value.re,
            imag: value.im,
        });
    }
    Ok(value.re)
}

/// K = −∬ψ_u*[H₀ + (gN/2)(|ψ_u|²+|ψ_l|²)]ψ_l, U = (g/2)∬(|ψ_u|⁴+|ψ_l|⁴),
/// P = gN∬(ψ_u*)²ψ_l², P′ = gN∬|ψ_u|²|ψ_l|².
///
/// Imaginary parts are compared against ∬|integrand|, the scale of the
/// round-off in each sum.
pub fn gbh_integrals(modes: &LocalizedModes, sys: &GpSystem, n_atoms: f64, omega: f64) -> Result<GbhIntegrals> {
    let da = modes.grid.cell_area();
    let (u, l) = (&modes.upper, &modes.lower);
    let h0l = sys.apply_h0(l, omega);
    let gn = sys.gn;
    let mut k = Complex64::new(0.0, 0.0);
    let mut k_mag = 0.0;
    let mut p = Complex64::new(0.0, 0.0);
    let mut p_mag = 0.0;
    let (mut u4, mut pp) = (0.0, 0.0);
    for i in 0..u.len() {
        let (a, b) = (u[i], l[i]);
        let (na, nb) = (a.norm_sqr(), b.norm_sqr());
        let term = a.conj() * (h0l[i] + b * (0.5 * gn * (na + nb)));
        k += term;
        k_mag += term.norm();
        let pt = a.conj() * a.conj() * b * b;
        p += pt;
        p_mag += pt.norm();
        u4 += na * na + nb * nb;
        pp += na * nb;
    }
    Ok(GbhIntegrals {
        k: -check_real("K", k * da, k_mag * da)?,
        u: 0.5 * gn / n_atoms * u4 * da,
        p: gn * check_real("P", p * da, p_mag * da)?,
        p_prime: gn * pp * da,
    })
}

/// K from the energy-per-particle splitting E_π − E₀ = 2K.
pub fn k_from_energy_split(e0: f64, epi: f64) -> f64 {
    0.5 * (epi - e0)
}

/// Inverts T₀ = πħ/√(NU(K−P)/2): U_eff = 2π²ħ²/(N T₀² (K−P)). ħ in nK·s.
pub fn u_eff_from_period(t0: f64, k: f64, p: f64, n_atoms: f64, hbar: f64) -> Result<f64> {
    if k <= p {
        return Err(Error::domain(format!("K = {k:.4e} nK does not exceed P = {p:.4e} nK")));
    }
    if !(t0 > 0.0) {
        return Err(Error::domain(format!("period {t0} must be positive")));
    }
    Ok(2.0 * PI * PI * hbar * hbar / (n_atoms * t0 * t0 * (k - p)))
}

/// Which stationary point of the two-mode energy an oscillation surrounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TmMode {
    /// φ = 0.
    Zero,
    /// φ = π.
    Pi,
}

impl TmMode {
    pub fn phase(self) -> f64 {
        match self {
            TmMode::Zero => 0.0,
            TmMode::Pi => PI,
        }
    }

    fn sign(self) -> f64 {
        match self {
            TmMode::Zero => 1.0,
            TmMode::Pi => -1.0,
        }
    }
}

/// P_eff = ±K − 2π²ħ²/(N U_eff T±²) for oscillations about φ = 0 (+) or
/// φ = π (−).
pub fn p_eff_from_period(mode: TmMode, t: f64, k: f64, u_eff: f64, n_atoms: f64, hbar: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NotAMinimum(format!("{mode:?} mode has no finite period")));
    }
    let pe = mode.sign() * k - 2.0 * PI * PI * hbar * hbar / (n_atoms * u_eff * t * t);
    let stable = match mode {
        TmMode::Zero => k > pe,
        TmMode::Pi => k < -pe,
    };
    if !stable {
        return Err(Error::NotAMinimum(format!("{mode:?} mode with K = {k:.4e}, P_eff = {pe:.4e}")));
    }
    Ok(pe)
}

/// Small-oscillation period of the given mode in the two-mode model,
/// πħ√(2/(N U (±K − P))). None when the mode is not a minimum.
pub fn tm_small_period(mode: TmMode, k: f64, u: f64, p: f64, n_atoms: f64, hbar: f64) -> Option<f64> {
    let x = mode.sign() * k - p;
    (x > 0.0 && u > 0.0).then(|| PI * hbar * (2.0 / (n_atoms * u * x)).sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodOptions {
    /// Real-time step (s).
    pub dt: f64,
    /// Whole periods to resolve before stopping.
    pub periods: usize,
    pub samples_per_period: usize,
    /// Give up after this many multiples of the expected duration; runs
    /// normally stop as soon as enough periods are resolved.
    pub max_duration_factor: f64,
}

impl PeriodOptions {
    /// The configured real-time step, capped below the grid's split-step
    /// resonance limit.
    pub fn new(cfg: &ScenarioConfig, sys: &GpSystem) -> Self {
        PeriodOptions {
            dt: sys.stable_real_dt(cfg.numerics.dt_real_s),
            periods: 2,
            samples_per_period: 80,
            max_duration_factor: 25.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodMeasurement {
    pub mode: TmMode,
    pub period: f64,
    pub z0: f64,
    pub samples: Vec<TimeSample>,
}

/// Real-time run from Ψ_TM(z0, φ_mode); the period of Z(t) about that
/// mode. A run whose phase leaves the neighbourhood of φ_mode is reported
/// as `NotAMinimum`.
pub fn measure_tm_period(
    sys: &GpSystem,
    modes: &LocalizedModes,
    omega: f64,
    mode: TmMode,
    z0: f64,
    t_guess: f64,
    opts: &PeriodOptions,
) -> Result<PeriodMeasurement> {
    let init = two_mode_state(modes, z0, mode.phase(), omega)?;
    let sample_every = ((t_guess / opts.samples_per_period as f64) / opts.dt).round().max(1.0) as usize;
    let t_final = opts.max_duration_factor * (opts.periods as f64 + 0.5) * t_guess;
    let evo = EvolveOptions::new(opts.dt, t_final, sample_every);
    let mut escaped = false;
    let mut t = Vec::new();
    let mut z = Vec::new();
    let samples = tm_time_series(sys, &init, omega, modes, &evo, |s| {
        let last = s.last().expect("observer pushes before stop");
        if wrap_phase(last.phi_rad - mode.phase()).abs() > 0.5 * PI || last.z.abs() > 0.5 {
            escaped = true;
            return true;
        }
        t.push(last.t_s);
        z.push(last.z);
        t.len() % 16 == 0 && cycles_completed(&t, &z) >= opts.periods
    })?;
    if escaped {
        return Err(Error::NotAMinimum(format!("{mode:?} mode: phase left its minimum")));
    }
    let tt: Vec<f64> = samples.iter().map(|s| s.t_s).collect();
    let zz: Vec<f64> = samples.iter().map(|s| s.z).collect();
    let period = period_estimate(&tt, &zz)?;
    Ok(PeriodMeasurement {
        mode,
        period,
        z0,
        samples,
    })
}

/// Per-frequency two-mode parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbhParams {
    pub f_over_f0: f64,
    /// From the overlap integral (nK).
    pub k: f64,
    /// From the energy splitting (nK).
    pub k_split: f64,
    pub u: f64,
    pub p: f64,
    pub p_prime: f64,
    pub u_eff: f64,
    /// Mean of the available mode estimates.
    pub p_eff: Option<f64>,
    pub p_eff_zero: Option<f64>,
    pub p_eff_pi: Option<f64>,
    /// |difference| of the two estimates when both exist.
    pub p_eff_spread: Option<f64>,
    pub period_zero: Option<f64>,
    pub period_pi: Option<f64>,
    pub mu_zero: f64,
    pub energy_zero: f64,
    pub energy_pi: f64,
    pub n_atoms: f64,
    pub in_central_interval: bool,
}

impl GbhParams {
    /// |K/P_eff| < 1 with P_eff < 0.
    pub fn central(&self) -> bool {
        matches!(self.p_eff, Some(pe) if pe < 0.0 && self.k.abs() < pe.abs())
    }
}

/// Mean of the available estimates and their spread.
pub fn combine_p_eff(zero: Option<f64>, pi: Option<f64>) -> (Option<f64>, Option<f64>) {
    match (zero, pi) {
        (Some(a), Some(b)) => (Some(0.5 * (a + b)), Some((a - b).abs())),
        (Some(a), None) | (None, Some(a)) => (Some(a), None),
        (None, None) => (None, None),
    }
}

/// Quantities fixed at Ω = 0 and reused at every frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub f0_hz: f64,
    pub mu_gs: f64,
    pub integrals: GbhIntegrals,
    pub k_split: f64,
    pub t0: f64,
    pub z0: f64,
    pub u_eff: f64,
}

/// How the central-interval edges are located between bracketing samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeMethod {
    /// Linear interpolation of |K| − |P_eff| between samples.
    Interpolate,
    /// Root finding with a fresh P_eff period measurement at every trial
    /// frequency.
    Measured,
    /// Root finding on |K(f)| − |P_eff(f₀/2)| with K from stationary states
    /// only. P_eff is stationary at f₀/2, so for narrow intervals this
    /// differs from `Measured` at second order in the edge offset.
    CentralPeff,
}

/// Which sweep points get real-time period measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeffSampling {
    /// Every sample.
    Every,
    /// Only f₀/2; other samples carry stationary-state quantities and the
    /// central-interval test uses P_eff(f₀/2).
    CentreOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOptions {
    pub f_over_f0: Vec<f64>,
    pub relax: RelaxOptions,
    pub period: PeriodOptions,
    pub peff: PeffSampling,
    pub edges: EdgeMethod,
    /// Edge tolerance in units of f/f₀.
    pub edge_tol: f64,
}

impl SweepOptions {
    pub fn new(cfg: &ScenarioConfig, sys: &GpSystem, samples: usize) -> Self {
        SweepOptions {
            f_over_f0: uniform_samples(samples),
            relax: RelaxOptions::from_config(cfg),
            period: PeriodOptions::new(cfg, sys),
            peff: PeffSampling::Every,
            edges: EdgeMethod::CentralPeff,
            edge_tol: 5e-4,
        }
    }
}

/// `n` uniform points on [fmin, fmax] plus f₀/2 and f₀/2 ± 0.01, the
/// latter pinning the slope of K where the qubit window sits.
pub fn refined_samples(n: usize, fmin: f64, fmax: f64) -> Vec<f64> {
    let mut v: Vec<f64> = match n {
        0 => vec![],
        1 => vec![0.5 * (fmin + fmax)],
        _ => (0..n).map(|i| fmin + (fmax - fmin) * i as f64 / (n - 1) as f64).collect(),
    };
    v.extend([0.49, 0.5, 0.51].into_iter().filter(|f| (fmin..=fmax).contains(f)));
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    v
}

/// `n` uniform points on [0, 1].
pub fn uniform_samples(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Mean-field problem plus the Ω = 0 calibration.
pub struct Extractor<'a> {
    pub sys: &'a GpSystem,
    pub cfg: &'a ScenarioConfig,
    pub f0_hz: f64,
    pub relax: RelaxOptions,
    pub period: PeriodOptions,
}

struct PointStates {
    zero: StationaryState,
    pi: StationaryState,
    modes: LocalizedModes,
    integrals: GbhIntegrals,
}

impl<'a> Extractor<'a> {
    pub fn new(sys: &'a GpSystem, cfg: &'a ScenarioConfig, f0_hz: f64) -> Self {
        Extractor {
            sys,
            cfg,
            f0_hz,
            relax: RelaxOptions::from_config(cfg),
            period: PeriodOptions::new(cfg, sys),
        }
    }

    fn omega(&self, f_over_f0: f64) -> f64 {
        2.0 * PI * self.f0_hz * f_over_f0
    }

    fn states(&self, f: f64) -> Result<PointStates> {
        let omega = self.omega(f);
        // the zero state is degenerate in winding at f = f₀, the π state at f = 0
        let zero = zero_state(self.sys, self.cfg, omega, None, &self.relax, f < 0.999)?;
        let pi = pi_state(self.sys, self.cfg, omega, None, &self.relax, f > 0.001)?;
        let modes = localized_modes(&zero, &pi)?;
        let integrals = gbh_integrals(&modes, self.sys, self.cfg.n(), omega)?;
        Ok(PointStates {
            zero,
            pi,
            modes,
            integrals,
        })
    }

    fn hbar(&self) -> f64 {
        self.sys.hbar()
    }

    /// Critical imbalance of `mode` for trial parameters, falling back to
    /// √(8(|K|+|P|)/NU) when the mode is not a minimum of the trial model.
    fn critical_imbalance_guess(&self, mode: TmMode, k: f64, u: f64, p: f64) -> f64 {
        let nu = self.cfg.n() * u;
        if p < 0.0 && k.abs() < p.abs() {
            let d = p - mode.sign() * k;
            (-2.0 * d * d / (p * nu)).sqrt()
        } else if mode.sign() * k > p {
            (8.0 * k.abs() / nu).sqrt()
        } else {
            (8.0 * (k.abs() + p.abs()) / nu).sqrt()
        }
    }

    fn expected_period(&self, mode: TmMode, k: f64, u: f64, p_guess: f64) -> f64 {
        let x = (mode.sign() * k - p_guess).max(0.2 * (k.abs() + p_guess.abs()));
        PI * self.hbar() * (2.0 / (self.cfg.n() * u * x)).sqrt()
    }

    /// Period of `mode` and the P_eff it implies, seeded at Z_c/20.
    ///
    /// The seed starts from the trial `p_guess`; an escape quarters it, and
    /// a seed above Z_c/10 of the measured parameters is re-run at Z_c/20.
    fn measure_mode(
        &self,
        modes: &LocalizedModes,
        omega: f64,
        mode: TmMode,
        k: f64,
        u_eff: f64,
        p_guess: f64,
    ) -> Result<(f64, f64, f64)> {
        let n = self.cfg.n();
        let t_guess = self.expected_period(mode, k, u_eff, p_guess);
        let mut z0 = (self.critical_imbalance_guess(mode, k, u_eff, p_guess) / 20.0).clamp(1e-5, 0.05);
        let mut escapes = 0;
        let mut reseeded = false;
        loop {
            match measure_tm_period(self.sys, modes, omega, mode, z0, t_guess, &self.period) {
                Ok(m) => {
                    let pe = p_eff_from_period(mode, m.period, k, u_eff, n, self.hbar())?;
                    let zc = self.critical_imbalance_guess(mode, k, u_eff, pe);
                    if !reseeded && z0 > zc / 10.0 {
                        reseeded = true;
                        z0 = (zc / 20.0).max(1e-5);
                        continue;
                    }
                    return Ok((m.period, pe, z0));
                }
                Err(Error::NotAMinimum(_)) if escapes < 3 && z0 > 1e-5 => {
                    escapes += 1;
                    z0 = (z0 / 4.0).max(1e-5);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Ω = 0 states, integrals and the U_eff calibration period.
    pub fn calibrate(&self) -> Result<Calibration> {
        let st = self.states(0.0).map_err(|e| e.at_frequency(0.0))?;
        let ig = st.integrals;
        let zc = self.critical_imbalance_guess(TmMode::Zero, ig.k, ig.u, ig.p);
        let z0 = (zc / 20.0).clamp(1e-5, 0.05);
        let t_guess = self.expected_period(TmMode::Zero, ig.k, ig.u, ig.p);
        let m = measure_tm_period(self.sys, &st.modes, 0.0, TmMode::Zero, z0, t_guess, &self.period)
            .map_err(|e| e.at_frequency(0.0))?;
        let u_eff = u_eff_from_period(m.period, ig.k, ig.p, self.cfg.n(), self.hbar())?;
        Ok(Calibration {
            f0_hz: self.f0_hz,
            mu_gs: st.zero.mu,
            integrals: ig,
            k_split: k_from_energy_split(st.zero.energy_per_particle, st.pi.energy_per_particle),
            t0: m.period,
            z0,
            u_eff,
        })
    }

    /// Parameters at one frequency. `p_guess` is a trial P_eff for the seed
    /// amplitude and expected period (the local P integral when `None`);
    /// `both_modes` also measures the secondary mode when it may be a
    /// minimum.
    pub fn point(&self, f: f64, cal: &Calibration, p_guess: Option<f64>, both_modes: bool) -> Result<GbhParams> {
        self.point_inner(f, cal, p_guess, both_modes).map_err(|e| e.at_frequency(f))
    }

    fn point_inner(&self, f: f64, cal: &Calibration, p_guess: Option<f64>, both_modes: bool) -> Result<GbhParams> {
        let omega = self.omega(f);
        let st = self.states(f)?;
        let ig = st.integrals;
        let n = self.cfg.n();
        let u_eff = cal.u_eff;
        let primary = if f <= 0.5 { TmMode::Zero } else { TmMode::Pi };
        let secondary = if primary == TmMode::Zero { TmMode::Pi } else { TmMode::Zero };
        let p_guess = p_guess.unwrap_or(ig.p);

        let run = |mode: TmMode| -> Result<(f64, f64)> {
            if f == 0.0 && mode == TmMode::Zero {
                return Ok((cal.t0, p_eff_from_period(mode, cal.t0, ig.k, u_eff, n, self.hbar())?));
            }
            let (t, pe, _) = self.measure_mode(&st.modes, omega, mode, ig.k, u_eff, p_guess)?;
            Ok((t, pe))
        };
        let mut period_zero = None;
        let mut period_pi = None;
        let mut est_zero = None;
        let mut est_pi = None;
        let (t1, e1) = run(primary)?;
        match primary {
            TmMode::Zero => (period_zero, est_zero) = (Some(t1), Some(e1)),
            TmMode::Pi => (period_pi, est_pi) = (Some(t1), Some(e1)),
        }
        let maybe_stable = (f - 0.5).abs() < 1e-12 || ig.k.abs() < 2.0 * p_guess.abs();
        if both_modes && maybe_stable {
            match run(secondary) {
                Ok((t, e)) => match secondary {
                    TmMode::Zero => (period_zero, est_zero) = (Some(t), Some(e)),
                    TmMode::Pi => (period_pi, est_pi) = (Some(t), Some(e)),
                },
                Err(Error::NotAMinimum(_)) | Err(Error::TooFewCrossings(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let (p_eff, spread) = combine_p_eff(est_zero, est_pi);
        let mut out = GbhParams {
            f_over_f0: f,
            k: ig.k,
            k_split: k_from_energy_split(st.zero.energy_per_particle, st.pi.energy_per_particle),
            u: ig.u,
            p: ig.p,
            p_prime: ig.p_prime,
            u_eff,
            p_eff,
            p_eff_zero: est_zero,
            p_eff_pi: est_pi,
            p_eff_spread: spread,
            period_zero,
            period_pi,
            mu_zero: st.zero.mu,
            energy_zero: st.zero.energy_per_particle,
            energy_pi: st.pi.energy_per_particle,
            n_atoms: n,
            in_central_interval: false,
        };
        out.in_central_interval = out.central();
        Ok(out)
    }

    /// Stationary-state quantities only; P_eff and the periods are left
    /// empty.
    pub fn point_static(&self, f: f64, cal: &Calibration) -> Result<GbhParams> {
        let st = self.states(f).map_err(|e| e.at_frequency(f))?;
        let ig = st.integrals;
        Ok(GbhParams {
            f_over_f0: f,
            k: ig.k,
            k_split: k_from_energy_split(st.zero.energy_per_particle, st.pi.energy_per_particle),
            u: ig.u,
            p: ig.p,
            p_prime: ig.p_prime,
            u_eff: cal.u_eff,
            p_eff: None,
            p_eff_zero: None,
            p_eff_pi: None,
            p_eff_spread: None,
            period_zero: None,
            period_pi: None,
            mu_zero: st.zero.mu,
            energy_zero: st.zero.energy_per_particle,
            energy_pi: st.pi.energy_per_particle,
            n_atoms: self.cfg.n(),
            in_central_interval: false,
        })
    }

    /// |K| − |P_eff| with P_eff from the mode that is stable on that side of
    /// f₀/2; negative inside the central interval.
    fn edge_function(&self, f: f64, cal: &Calibration, p_guess: f64, store: &mut Vec<GbhParams>) -> Result<f64> {
        let pt = self.point(f, cal, Some(p_guess), false)?;
        let g = pt.k.abs() - pt.p_eff.map(f64::abs).unwrap_or(0.0);
        store.push(pt);
        Ok(g)
    }

    /// |K(f)| − |p_eff| from stationary states alone.
    fn edge_function_central(&self, f: f64, p_eff: f64) -> Result<f64> {
        let st = self.states(f).map_err(|e| e.at_frequency(f))?;
        Ok(st.integrals.k.abs() - p_eff.abs())
    }

    pub fn sweep(&self, opts: &SweepOptions) -> Result<GbhCurve> {
        if !opts.f_over_f0.iter().any(|&f| (f - 0.5).abs() < 1e-12) {
            return Err(Error::domain("frequency samples must include f/f0 = 0.5"));
        }
        if opts.f_over_f0.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(Error::domain("frequency samples must lie in [0, 1]"));
        }
        let ex = Extractor {
            relax: opts.relax.clone(),
            period: opts.period.clone(),
            ..*self
        };
        let cal = ex.calibrate()?;
        let centre_point = ex.point(0.5, &cal, None, true)?;
        let p_guess = centre_point.p_eff.unwrap_or(centre_point.p);
        let results: Vec<(f64, Result<GbhParams>)> = opts
            .f_over_f0
            .par_iter()
            .filter(|&&f| (f - 0.5).abs() >= 1e-12)
            .map(|&f| {
                let r = match opts.peff {
                    PeffSampling::Every => ex.point(f, &cal, Some(p_guess), true),
                    PeffSampling::CentreOnly => ex.point_static(f, &cal),
                };
                (f, r)
            })
            .collect();
        let mut points = Vec::with_capacity(results.len() + 1);
        let mut failures = Vec::new();
        for (f, r) in results {
            match r {
                Ok(p) => points.push(p),
                Err(e) => failures.push(SweepFailure {
                    f_over_f0: f,
                    message: e.to_string(),
                }),
            }
        }
        points.push(centre_point);
        if opts.peff == PeffSampling::CentreOnly {
            for p in points.iter_mut().filter(|p| p.p_eff.is_none()) {
                p.in_central_interval = p_guess < 0.0 && p.k.abs() < p_guess.abs();
            }
        }
        points.sort_by(|a, b| a.f_over_f0.total_cmp(&b.f_over_f0));

        let centre = points
            .iter()
            .position(|p| (p.f_over_f0 - 0.5).abs() < 1e-12)
            .expect("checked above");
        let mut interval = None;
        if points[centre].in_central_interval {
            let mut lo = centre;
            while lo > 0 && points[lo - 1].in_central_interval {
                lo -= 1;
            }
            let mut hi = centre;
            while hi + 1 < points.len() && points[hi + 1].in_central_interval {
                hi += 1;
            }
            let pe_guess = points[centre].p_eff.unwrap_or(p_guess);
            let g = |p: &GbhParams| p.k.abs() - p.p_eff.unwrap_or(pe_guess).abs();
            let mut extra = Vec::new();
            let mut edge = |inside: usize, outside: Option<usize>| -> Result<f64> {
                let Some(out) = outside else {
                    return Ok(points[inside].f_over_f0);
                };
                let (a, b) = (points[out].f_over_f0, points[inside].f_over_f0);
                let (ga, gb) = (g(&points[out]), g(&points[inside]));
                let (root, _) = match opts.edges {
                    EdgeMethod::Interpolate => return Ok(a + (b - a) * ga / (ga - gb)),
                    EdgeMethod::Measured => illinois(
                        |f| match f {
                            _ if f == a => Ok(ga),
                            _ if f == b => Ok(gb),
                            _ => ex.edge_function(f, &cal, pe_guess, &mut extra),
                        },
                        a,
                        b,
                        opts.edge_tol,
                        40,
                    )?,
                    EdgeMethod::CentralPeff => illinois(
                        |f| match f {
                            _ if f == a => Ok(points[out].k.abs() - pe_guess.abs()),
                            _ if f == b => Ok(points[inside].k.abs() - pe_guess.abs()),
                            _ => ex.edge_function_central(f, pe_guess),
                        },
                        a,
                        b,
                        opts.edge_tol,
                        60,
                    )?,
                };
                Ok(root)
            };
            let f_lo = edge(lo, lo.checked_sub(1))?;
            let f_hi = edge(hi, (hi + 1 < points.len()).then_some(hi + 1))?;
            interval = Some((f_lo, f_hi));
            points.extend(extra);
            points.sort_by(|a, b| a.f_over_f0.total_cmp(&b.f_over_f0));
        }
        Ok(GbhCurve {
            name: self.cfg.name.clone(),
            f0_hz: self.f0_hz,
            vb: self.cfg.vb(),
            calibration: cal,
            points,
            central_interval: interval,
            failures,
        })
    }
}

/// A sweep frequency whose extraction failed; the sweep carries on without it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub f_over_f0: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbhCurve {
    pub name: String,
    pub f0_hz: f64,
    /// Barrier height (nK), for μ/V_b reporting.
    pub vb: f64,
    pub calibration: Calibration,
    pub points: Vec<GbhParams>,
    /// (f_lo, f_hi) in units of f₀.
    pub central_interval: Option<(f64, f64)>,
    #[serde(default)]
    pub failures: Vec<SweepFailure>,
}

/// Scenario-level scalars summarising a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbhSummary {
    pub name: String,
    pub f0_hz: f64,
    pub mu_gs_over_vb: f64,
    pub u_nk: f64,
    pub p_half_nk: Option<f64>,
    pub u_eff_over_u: f64,
    pub p_eff_over_p_half: Option<f64>,
    pub delta_f_over_f0: Option<f64>,
    pub central_interval: Option<(f64, f64)>,
    pub t0_s: f64,
    pub k0_nk: f64,
    pub p0_nk: f64,
}

pub const GBH_CSV_HEADER: &str = "f_over_f0,K_nK,U_nK,P_nK,Pprime_nK,Ueff_nK,Peff_nK,in_central_interval";

impl GbhCurve {
    pub fn at(&self, f_over_f0: f64) -> Option<&GbhParams> {
        self.points.iter().find(|p| (p.f_over_f0 - f_over_f0).abs() < 1e-12)
    }

    pub fn summary(&self) -> GbhSummary {
        let half = self.at(0.5);
        let cal = &self.calibration;
        GbhSummary {
            name: self.name.clone(),
            f0_hz: self.f0_hz,
            mu_gs_over_vb: cal.mu_gs / self.vb,
            u_nk: cal.integrals.u,
            p_half_nk: half.map(|h| h.p),
            u_eff_over_u: cal.u_eff / cal.integrals.u,
            p_eff_over_p_half: half.and_then(|h| h.p_eff.map(|pe| pe / h.p)),
            delta_f_over_f0: self.central_interval.map(|(a, b)| b - a),
            central_interval: self.central_interval,
            t0_s: cal.t0,
            k0_nk: cal.integrals.k,
            p0_nk: cal.integrals.p,
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "{GBH_CSV_HEADER}")?;
        for p in &self.points {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{}",
                p.f_over_f0,
                p.k,
                p.u,
                p.p,
                p.p_prime,
                p.u_eff,
                p.p_eff.unwrap_or(f64::NAN),
                p.in_central_interval
            )?;
        }
        f.flush()?;
        Ok(())
    }
}

/// One row of `gbh_curve.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub f_over_f0: f64,
    pub k: f64,
    pub u: f64,
    pub p: f64,
    pub p_prime: f64,
    pub u_eff: f64,
    pub p_eff: f64,
    pub in_central_interval: bool,
}

impl From<&GbhParams> for CurveRow {
    fn from(p: &GbhParams) -> Self {
        CurveRow {
            f_over_f0: p.f_over_f0,
            k: p.k,
            u: p.u,
            p: p.p,
            p_prime: p.p_prime,
            u_eff: p.u_eff,
            p_eff: p.p_eff.unwrap_or(f64::NAN),
            in_central_interval: p.in_central_interval,
        }
    }
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == GBH_CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 8 {
                return Err(Error::Parse(format!("row {}: expected 8 columns", i + 1)));
            }
            let num = |j: usize| {
                cols[j]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}, column {}: {e}", i + 1, j + 1)))
            };
            Ok(CurveRow {
                f_over_f0: num(0)?,
                k: num(1)?,
                u: num(2)?,
                p: num(3)?,
                p_prime: num(4)?,
                u_eff: num(5)?,
                p_eff: num(6)?,
                in_central_interval: cols[7]
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?,
            })
        })
        .collect()
}
