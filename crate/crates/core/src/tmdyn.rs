//! Semiclassical two-mode dynamics in (Z, φ): the energy landscape, its
//! stationary points, trajectories, and the critical imbalance and current
//! formulas, including the Sagnac-phase picture of the two junctions.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::constants;

/// Two-mode parameters at one rotation frequency (energies in nK).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmParams {
    pub k: f64,
    pub u_eff: f64,
    pub p_eff: f64,
    pub n_atoms: f64,
    /// ħ/k_B (nK·s).
    pub hbar: f64,
}

impl TmParams {
    pub fn new(k: f64, u_eff: f64, p_eff: f64, n_atoms: f64) -> Self {
        TmParams {
            k,
            u_eff,
            p_eff,
            n_atoms,
            hbar: constants().hbar_over_kb,
        }
    }

    fn nu(&self) -> f64 {
        self.n_atoms * self.u_eff
    }

    /// Both φ = 0 and φ = π are minima: |K/P_eff| < 1 with P_eff < 0.
    pub fn in_central_interval(&self) -> bool {
        self.p_eff < 0.0 && self.k.abs() < self.p_eff.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmState {
    pub z: f64,
    pub phi: f64,
    pub t: f64,
}

/// E_TM = NU(1+Z²)/4 − K√(1−Z²) cos φ + (P/4)(1−Z²) cos 2φ per particle,
/// with U → U_eff and P → P_eff.
pub fn tm_energy(z: f64, phi: f64, p: &TmParams) -> f64 {
    let s2 = 1.0 - z * z;
    0.25 * p.nu() * (1.0 + z * z) - p.k * s2.max(0.0).sqrt() * phi.cos() + 0.25 * p.p_eff * s2 * (2.0 * phi).cos()
}

/// Modified two-mode equations: ħŻ = −2K√(1−Z²) sin φ + P_eff(1−Z²) sin 2φ,
/// ħφ̇ = N U_eff Z. Returns (Ż, φ̇) in s⁻¹ and rad/s.
pub fn tm_rhs(state: &TmState, p: &TmParams) -> Result<(f64, f64)> {
    let z = state.z;
    if !(z.abs() < 1.0) {
        return Err(Error::domain(format!("|Z| = {} reaches the pole", z.abs())));
    }
    let s2 = 1.0 - z * z;
    let zdot = (-2.0 * p.k * s2.sqrt() * state.phi.sin() + p.p_eff * s2 * (2.0 * state.phi).sin()) / p.hbar;
    Ok((zdot, p.nu() * z / p.hbar))
}

/// Hamiltonian vector field of N·E_TM/ħ on (Z, φ), with its Jacobian.
///
/// Ż coincides with the modified equations; φ̇ carries the K and P_eff
/// corrections of relative order |K|/NU that the modified equations drop.
fn flow(z: f64, phi: f64, p: &TmParams) -> ([f64; 2], [[f64; 2]; 2]) {
    let s2 = 1.0 - z * z;
    let s = s2.sqrt();
    let (sn, cs) = phi.sin_cos();
    let (sn2, cs2) = (2.0 * phi).sin_cos();
    let h = p.hbar;
    let zdot = (-2.0 * p.k * s * sn + p.p_eff * s2 * sn2) / h;
    let phidot = (p.nu() * z + 2.0 * p.k * z * cs / s - p.p_eff * z * cs2) / h;
    let j = [
        [
            (2.0 * p.k * z / s * sn - 2.0 * p.p_eff * z * sn2) / h,
            (-2.0 * p.k * s * cs + 2.0 * p.p_eff * s2 * cs2) / h,
        ],
        [
            (p.nu() + 2.0 * p.k * cs / (s2 * s) - p.p_eff * cs2) / h,
            (-2.0 * p.k * z * sn / s + 2.0 * p.p_eff * z * sn2) / h,
        ],
    ];
    ([zdot, phidot], j)
}

/// One implicit-midpoint step (symmetric and symplectic for the canonical
/// pair 𝒩 = NZ/2, φ), solved by Newton iteration.
pub fn midpoint_step(state: &TmState, p: &TmParams, dt: f64) -> Result<TmState> {
    let (z0, f0) = (state.z, state.phi);
    let ([a, b], _) = flow(z0, f0, p);
    let (mut z1, mut f1) = (z0 + dt * a, f0 + dt * b);
    for _ in 0..50 {
        let (zm, fm) = (0.5 * (z0 + z1), 0.5 * (f0 + f1));
        if !(zm.abs() < 1.0) {
            return Err(Error::domain(format!("step rejected: |Z| = {} reaches the pole", zm.abs())));
        }
        let ([va, vb], j) = flow(zm, fm, p);
        let (ga, gb) = (z1 - z0 - dt * va, f1 - f0 - dt * vb);
        let h = 0.5 * dt;
        let (m00, m01, m10, m11) = (1.0 - h * j[0][0], -h * j[0][1], -h * j[1][0], 1.0 - h * j[1][1]);
        let det = m00 * m11 - m01 * m10;
        let dz = (ga * m11 - gb * m01) / det;
        let dphi = (gb * m00 - ga * m10) / det;
        z1 -= dz;
        f1 -= dphi;
        if dz.abs() <= 1e-15 * (1.0 + z1.abs()) && dphi.abs() <= 1e-15 * (1.0 + f1.abs()) {
            break;
        }
    }
    if !(z1.abs() < 1.0) {
        return Err(Error::domain(format!("step rejected: |Z| = {} reaches the pole", z1.abs())));
    }
    Ok(TmState {
        z: z1,
        phi: f1,
        t: state.t + dt,
    })
}

/// Default step: min(T/500, 10⁻⁴ s) with T the small-oscillation period of
/// the slower stable minimum (or of |K| + |P_eff| when neither is stable).
pub fn default_dt(p: &TmParams) -> f64 {
    let x = [p.k - p.p_eff, -p.k - p.p_eff]
        .into_iter()
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    let x = if x.is_finite() { x } else { p.k.abs() + p.p_eff.abs() };
    if !(x > 0.0) {
        return 1e-4;
    }
    let t = PI * p.hbar * (2.0 / (p.nu() * x)).sqrt();
    (t / 500.0).min(1e-4)
}

/// Trajectory from `state0` to `t_final`, recording every `record_every`
/// steps (and the final state).
pub fn integrate_tm(state0: TmState, p: &TmParams, t_final: f64, dt: f64, record_every: usize) -> Result<Vec<TmState>> {
    if !(state0.z.abs() < 1.0) {
        return Err(Error::domain("initial |Z| must be below 1"));
    }
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be positive"));
    }
    let steps = ((t_final - state0.t) / dt).round().max(0.0) as usize;
    let every = record_every.max(1);
    let mut out = Vec::with_capacity(steps / every + 2);
    out.push(state0);
    let mut s = state0;
    for i in 1..=steps {
        s = midpoint_step(&s, p, dt)?;
        if i % every == 0 || i == steps {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Minimum,
    Saddle,
    /// Vanishing curvature along φ.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub phi: f64,
    pub kind: PointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPointReport {
    /// All at Z = 0: φ = 0, φ = π, then ±arccos(K/P_eff) when it exists.
    pub points: Vec<StationaryPoint>,
}

impl StationaryPointReport {
    pub fn kind_at(&self, phi: f64) -> Option<PointKind> {
        self.points.iter().find(|s| (s.phi - phi).abs() < 1e-12).map(|s| s.kind)
    }
}

/// Stationary points at Z = 0 classified by the curvature ∂²E/∂φ²
/// (∂²E/∂Z² ≈ NU/2 > 0 throughout).
pub fn classify_stationary(p: &TmParams) -> StationaryPointReport {
    let kind = |curv: f64| {
        if curv > 0.0 {
            PointKind::Minimum
        } else if curv < 0.0 {
            PointKind::Saddle
        } else {
            PointKind::Degenerate
        }
    };
    let mut points = vec![
        StationaryPoint {
            phi: 0.0,
            kind: kind(p.k - p.p_eff),
        },
        StationaryPoint {
            phi: PI,
            kind: kind(-p.k - p.p_eff),
        },
    ];
    if p.p_eff != 0.0 && (p.k / p.p_eff).abs() < 1.0 {
        let a = (p.k / p.p_eff).acos();
        let c = (p.p_eff * p.p_eff - p.k * p.k) / p.p_eff;
        points.push(StationaryPoint { phi: a, kind: kind(c) });
        points.push(StationaryPoint { phi: -a, kind: kind(c) });
    }
    StationaryPointReport { points }
}

/// Which minimum a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Zero,
    Pi,
}

/// A critical quantity: one value outside the central interval, one per
/// minimum inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Critical {
    Single { branch: Branch, value: f64 },
    Pair { zero: f64, pi: f64 },
}

impl Critical {
    pub fn get(&self, branch: Branch) -> Option<f64> {
        match *self {
            Critical::Single { branch: b, value } => (b == branch).then_some(value),
            Critical::Pair { zero, pi } => Some(match branch {
                Branch::Zero => zero,
                Branch::Pi => pi,
            }),
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Critical::Single { value, .. } => value,
            Critical::Pair { zero, pi } => zero.max(pi),
        }
    }
}

/// Z_c = √(8|K|/NU_eff) outside the central interval;
/// Z_c^± = √(−2(P_eff ∓ K)²/(P_eff NU_eff)) inside it.
pub fn critical_imbalance(p: &TmParams) -> Result<Critical> {
    let nu = p.nu();
    if p.p_eff != 0.0 && (p.k / p.p_eff).abs() < 1.0 {
        if p.p_eff >= 0.0 {
            return Err(Error::domain(format!(
                "|K/P_eff| < 1 with P_eff = {:.4e} > 0: both φ = 0 and π are saddles",
                p.p_eff
            )));
        }
        let zc = |d: f64| (-2.0 * d * d / (p.p_eff * nu)).sqrt();
        return Ok(Critical::Pair {
            zero: zc(p.p_eff - p.k),
            pi: zc(p.p_eff + p.k),
        });
    }
    let branch = if p.k >= 0.0 { Branch::Zero } else { Branch::Pi };
    Ok(Critical::Single {
        branch,
        value: (8.0 * p.k.abs() / nu).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionCurrentParams {
    /// I₀/N (s⁻¹).
    pub i0_per_n: f64,
    pub alpha0: f64,
}

/// I₀/N = K⁰/2ħ and α₀ = −P_eff⁰/(2K⁰) from the Ω = 0 parameters.
pub fn current_params(k0: f64, p_eff0: f64, hbar: f64) -> Result<JunctionCurrentParams> {
    if !(k0 > 0.0) {
        return Err(Error::domain(format!("K⁰ = {k0:.4e} nK must be positive")));
    }
    Ok(JunctionCurrentParams {
        i0_per_n: k0 / (2.0 * hbar),
        alpha0: -p_eff0 / (2.0 * k0),
    })
}

impl JunctionCurrentParams {
    /// K⁰ = 2ħ I₀/N.
    pub fn k0(&self, hbar: f64) -> f64 {
        2.0 * hbar * self.i0_per_n
    }

    /// P_eff⁰ = −2α₀K⁰.
    pub fn p_eff0(&self, hbar: f64) -> f64 {
        -2.0 * self.alpha0 * self.k0(hbar)
    }
}

/// I_k/N = (I₀/N)[sin φ_k + α₀ sin 2φ_k].
pub fn junction_current(phi_k: f64, jp: &JunctionCurrentParams) -> f64 {
    jp.i0_per_n * (phi_k.sin() + jp.alpha0 * (2.0 * phi_k).sin())
}

/// Phase in [0, π] that maximizes |I_k| and the maximum, from
/// cos φ = −1/(8α₀) ∓ √(½ + 1/(64α₀²)).
pub fn max_junction_current(jp: &JunctionCurrentParams) -> (f64, f64) {
    let phi = extremal_phases(1.0, -jp.alpha0)
        .into_iter()
        .max_by(|a, b| junction_current(*a, jp).abs().total_cmp(&junction_current(*b, jp).abs()))
        .expect("at least one extremal phase is real");
    (phi, junction_current(phi, jp).abs())
}

/// Phases in [0, π] where |−2K sin φ + P sin 2φ| is stationary:
/// cos φ = K/(4P) ± √(½ + (K/4P)²), keeping the real ones; π/2 when P = 0.
/// Ordered by decreasing cos φ.
pub fn extremal_phases(k: f64, p: f64) -> Vec<f64> {
    if p == 0.0 {
        return vec![0.5 * PI];
    }
    let r = k / (4.0 * p);
    let d = (0.5 + r * r).sqrt();
    let mut c: Vec<f64> = [r + d, r - d].into_iter().filter(|c| c.abs() <= 1.0).collect();
    c.sort_by(|a, b| b.total_cmp(a));
    c.into_iter().map(f64::acos).collect()
}

/// ħŻ at Z = 0 divided by 2: the transfer current per particle,
/// (−2K sin φ + P sin 2φ)/(2ħ).
fn half_zdot(k: f64, p: f64, phi: f64, hbar: f64) -> f64 {
    (-2.0 * k * phi.sin() + p * (2.0 * phi).sin()) / (2.0 * hbar)
}

/// I_c/N = max|Ż|/2 at the extremal phases of the modified Ż equation.
///
/// Inside the central interval both phases are real; the one closer to
/// φ = 0 belongs to the 0 minimum. Outside, the phase with the larger
/// current is kept.
pub fn critical_current_gbh(p: &TmParams) -> Critical {
    let phases = extremal_phases(p.k, p.p_eff);
    let current = |phi: f64| half_zdot(p.k, p.p_eff, phi, p.hbar).abs();
    if p.in_central_interval() && phases.len() == 2 {
        return Critical::Pair {
            zero: current(phases[0]),
            pi: current(phases[1]),
        };
    }
    let value = phases.iter().map(|&f| current(f)).fold(0.0, f64::max);
    let branch = if p.k >= 0.0 { Branch::Zero } else { Branch::Pi };
    Critical::Single { branch, value }
}

/// Effective K and P_eff of the junction pair at Sagnac phase ξ:
/// K⁰ cos ξ and P_eff⁰ cos 2ξ.
pub fn sagnac_params(jp: &JunctionCurrentParams, xi: f64, u_eff: f64, n_atoms: f64) -> TmParams {
    let hbar = constants().hbar_over_kb;
    TmParams::new(jp.k0(hbar) * xi.cos(), u_eff, jp.p_eff0(hbar) * (2.0 * xi).cos(), n_atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SagnacCurrent {
    /// max over φ of |ħŻ|/2ħ with ħŻ = −4ħ(I₀/N)[cos(πf/f₀) sin φ + α₀ cos(2πf/f₀) sin 2φ].
    pub exact: f64,
    /// 2(I₀/N)|cos(πf/f₀)|.
    pub alpha0_limit: f64,
}

pub fn critical_current_sagnac(jp: &JunctionCurrentParams, f_over_f0: f64) -> SagnacCurrent {
    let (a, b) = ((PI * f_over_f0).cos(), jp.alpha0 * (2.0 * PI * f_over_f0).cos());
    // same extremal problem as the GBH route with K → a, P → −2b
    let g = |phi: f64| 2.0 * jp.i0_per_n * (a * phi.sin() + b * (2.0 * phi).sin()).abs();
    let exact = extremal_phases(a, -2.0 * b).into_iter().map(g).fold(0.0, f64::max);
    SagnacCurrent {
        exact,
        alpha0_limit: 2.0 * jp.i0_per_n * a.abs(),
    }
}

/// Left and right junction currents per particle for phase difference φ
/// and mean phase ξ: φ_r = ξ + φ − 2nπ, φ_l = ξ − φ.
pub fn interference_decomposition(phi: f64, xi: f64, jp: &JunctionCurrentParams, n: i32) -> (f64, f64) {
    let phi_r = xi + phi - 2.0 * n as f64 * PI;
    let phi_l = xi - phi;
    (junction_current(phi_l, jp), junction_current(phi_r, jp))
}

/// Frequency dependence of the two-mode parameters.
pub trait ParamCurve: Sync {
    fn n_atoms(&self) -> f64;
    fn u_eff(&self) -> f64;
    fn k(&self, f_over_f0: f64) -> f64;
    fn p_eff(&self, f_over_f0: f64) -> f64;

    fn params(&self, f_over_f0: f64) -> TmParams {
        TmParams::new(self.k(f_over_f0), self.u_eff(), self.p_eff(f_over_f0), self.n_atoms())
    }
}

/// Closed-form curve from Ω = 0 and f₀/2 data: K(f) = K⁰ cos(πf/f₀) and
/// P_eff(f) = a + b cos(2πf/f₀) through P_eff⁰ and P_eff(f₀/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastModel {
    pub n_atoms: f64,
    pub u_eff: f64,
    pub k0: f64,
    pub p_eff0: f64,
    pub p_eff_half: f64,
}

impl FastModel {
    /// From junction current parameters (I₀/N, α₀), U_eff and P_eff(f₀/2).
    pub fn from_currents(jp: &JunctionCurrentParams, u_eff: f64, p_eff_half: f64, n_atoms: f64) -> Self {
        let hbar = constants().hbar_over_kb;
        FastModel {
            n_atoms,
            u_eff,
            k0: jp.k0(hbar),
            p_eff0: jp.p_eff0(hbar),
            p_eff_half,
        }
    }

    pub fn junction(&self) -> Result<JunctionCurrentParams> {
        current_params(self.k0, self.p_eff0, constants().hbar_over_kb)
    }
}

impl ParamCurve for FastModel {
    fn n_atoms(&self) -> f64 {
        self.n_atoms
    }
    fn u_eff(&self) -> f64 {
        self.u_eff
    }
    fn k(&self, f: f64) -> f64 {
        // sin form is exactly zero at f₀/2
        self.k0 * (PI * (0.5 - f)).sin()
    }
    fn p_eff(&self, f: f64) -> f64 {
        let a = 0.5 * (self.p_eff0 + self.p_eff_half);
        let b = 0.5 * (self.p_eff0 - self.p_eff_half);
        a + b * (2.0 * PI * f).cos()
    }
}

/// Fritsch–Carlson monotone cubic through (x, y), x strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n == 0 {
            return Err(Error::domain("interpolation needs matching, non-empty samples"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("interpolation abscissae must increase strictly"));
        }
        if n == 1 {
            return Ok(MonotoneCubic { x, y, m: vec![0.0] });
        }
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let (a, b) = (m[i] / d[i], m[i + 1] / d[i]);
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                m[i] = t * a * d[i];
                m[i + 1] = t * b * d[i];
            }
        }
        Ok(MonotoneCubic { x, y, m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if n == 1 {
            return self.y[0];
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }
}

/// Curve interpolated from sampled K and P_eff. P_eff is held constant when
/// only one sample carries it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub n_atoms: f64,
    pub u_eff: f64,
    k: MonotoneCubic,
    p_eff: MonotoneCubic,
}

impl SampledCurve {
    /// `k` and `p_eff` as (f/f₀, value) pairs; NaN values are skipped.
    pub fn new(n_atoms: f64, u_eff: f64, k: &[(f64, f64)], p_eff: &[(f64, f64)]) -> Result<Self> {
        let build = |pts: &[(f64, f64)]| {
            let mut v: Vec<(f64, f64)> = pts.iter().copied().filter(|(_, y)| y.is_finite()).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
            MonotoneCubic::new(v.iter().map(|p| p.0).collect(), v.iter().map(|p| p.1).collect())
        };
        Ok(SampledCurve {
            n_atoms,
            u_eff,
            k: build(k)?,
            p_eff: build(p_eff)?,
        })
    }

    pub fn from_gbh(curve: &crate::gbh::GbhCurve) -> Result<Self> {
        let k: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.f_over_f0, p.k)).collect();
        let pe: Vec<(f64, f64)> = curve
            .points
            .iter()
            .filter_map(|p| p.p_eff.map(|v| (p.f_over_f0, v)))
            .collect();
        let n = curve.points.first().map(|p| p.n_atoms).unwrap_or(0.0);
        SampledCurve::new(n, curve.calibration.u_eff, &k, &pe)
    }

    pub fn from_rows(rows: &[crate::gbh::CurveRow], n_atoms: f64) -> Result<Self> {
        let u_eff = rows
            .first()
            .map(|r| r.u_eff)
            .ok_or_else(|| Error::domain("empty parameter curve"))?;
        let k: Vec<(f64, f64)> = rows.iter().map(|r| (r.f_over_f0, r.k)).collect();
        let pe: Vec<(f64, f64)> = rows.iter().map(|r| (r.f_over_f0, r.p_eff)).collect();
        SampledCurve::new(n_atoms, u_eff, &k, &pe)
    }
}

impl ParamCurve for SampledCurve {
    fn n_atoms(&self) -> f64 {
        self.n_atoms
    }
    fn u_eff(&self) -> f64 {
        self.u_eff
    }
    fn k(&self, f: f64) -> f64 {
        self.k.eval(f)
    }
    fn p_eff(&self, f: f64) -> f64 {
        self.p_eff.eval(f)
    }
}

/// One row of `critical_curves.csv`; `None` where the minimum does not
/// exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub f_over_f0: f64,
    pub zc_zero: Option<f64>,
    pub zc_pi: Option<f64>,
    pub ic_zero_per_n: Option<f64>,
    pub ic_pi_per_n: Option<f64>,
    pub ic_sagnac_per_n: f64,
    pub ic_sagnac_alpha0_per_n: f64,
}

pub const CRITICAL_CSV_HEADER: &str = "f_over_f0,Zc_0,Zc_pi,Ic_0_perN,Ic_pi_perN,Ic_sagnac_perN,Ic_sagnac_alpha0_perN";
pub const INTERFERENCE_CSV_HEADER: &str = "f_over_f0,Il_perN,minus_Ir_perN";

pub fn critical_curves(curve: &dyn ParamCurve, jp: &JunctionCurrentParams, f_over_f0: &[f64]) -> Vec<CriticalRow> {
    f_over_f0
        .iter()
        .map(|&f| {
            let p = curve.params(f);
            let zc = critical_imbalance(&p).ok();
            let ic = (zc.is_some()).then(|| critical_current_gbh(&p));
            let sag = critical_current_sagnac(jp, f);
            CriticalRow {
                f_over_f0: f,
                zc_zero: zc.and_then(|c| c.get(Branch::Zero)),
                zc_pi: zc.and_then(|c| c.get(Branch::Pi)),
                ic_zero_per_n: ic.and_then(|c| c.get(Branch::Zero)),
                ic_pi_per_n: ic.and_then(|c| c.get(Branch::Pi)),
                ic_sagnac_per_n: sag.exact,
                ic_sagnac_alpha0_per_n: sag.alpha0_limit,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRow {
    pub f_over_f0: f64,
    pub il_per_n: f64,
    pub minus_ir_per_n: f64,
}

/// Junction components of the critical current in the Sagnac picture
/// (ξ = −πf/f₀): at the extremal phase of the 0 minimum while it exists,
/// otherwise of the π minimum (winding 1).
pub fn interference_curve(jp: &JunctionCurrentParams, u_eff: f64, n_atoms: f64, f_over_f0: &[f64]) -> Vec<InterferenceRow> {
    f_over_f0
        .iter()
        .map(|&f| {
            let xi = -PI * f;
            let sp = sagnac_params(jp, xi, u_eff, n_atoms);
            let phases = extremal_phases(sp.k, sp.p_eff);
            let zero_exists = sp.k > sp.p_eff;
            let (phi, n) = if zero_exists {
                (phases[0], 0)
            } else {
                (*phases.last().expect("at least one extremal phase"), 1)
            };
            let (il, ir) = interference_decomposition(phi, xi, jp, n);
            InterferenceRow {
                f_over_f0: f,
                il_per_n: il,
                minus_ir_per_n: -ir,
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_critical_csv(path: impl AsRef<Path>, rows: &[CriticalRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{CRITICAL_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.f_over_f0,
            opt(r.zc_zero),
            opt(r.zc_pi),
            opt(r.ic_zero_per_n),
            opt(r.ic_pi_per_n),
            r.ic_sagnac_per_n,
            r.ic_sagnac_alpha0_per_n
        )?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_interference_csv(path: impl AsRef<Path>, rows: &[InterferenceRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{INTERFERENCE_CSV_HEADER}")?;
    for r in rows {
        writeln!(f, "{},{},{}", r.f_over_f0, r.il_per_n, r.minus_ir_per_n)?;
    }
    f.flush()?;
    Ok(())
}
