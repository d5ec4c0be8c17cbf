//! Quantized two-mode Hamiltonian ℋ = −U_eff ∂²_φ − NK cos φ + (NP_eff/4) cos 2φ
//! in the plane-wave basis e^{inφ}: spectra, Mathieu characteristic values,
//! persistent-current superpositions, level currents and qubit metrics.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp2d::illinois;
use crate::tmdyn::ParamCurve;
use crate::units::constants;

pub const DEFAULT_N_MAX: usize = 32;
const MAX_N_MAX: usize = 1024;
/// Relative eigenvalue change tolerated when n_max doubles.
const CONVERGENCE_TOL: f64 = 1e-10;

/// Banded matrix of ℋ on n ∈ [−n_max, n_max] (index n + n_max).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseHamiltonian {
    pub u_eff: f64,
    pub k: f64,
    pub p_eff: f64,
    pub n_atoms: f64,
    pub n_max: usize,
}

impl PhaseHamiltonian {
    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    /// ⟨n|ℋ|m⟩: U_eff n² on the diagonal, −NK/2 at |n−m| = 1, NP_eff/8 at
    /// |n−m| = 2.
    pub fn element(&self, n: i64, m: i64) -> f64 {
        match (n - m).abs() {
            0 => self.u_eff * (n * n) as f64,
            1 => -0.5 * self.n_atoms * self.k,
            2 => 0.125 * self.n_atoms * self.p_eff,
            _ => 0.0,
        }
    }

    pub fn matrix(&self) -> Mat<f64> {
        let d = self.dim();
        let nm = self.n_max as i64;
        Mat::from_fn(d, d, |i, j| self.element(i as i64 - nm, j as i64 - nm))
    }

    fn with_n_max(&self, n_max: usize) -> Self {
        PhaseHamiltonian { n_max, ..self.clone() }
    }
}

pub fn build_matrix(u_eff: f64, k: f64, p_eff: f64, n_atoms: f64, n_max: usize) -> Result<PhaseHamiltonian> {
    if n_max < 12 {
        return Err(Error::domain(format!("n_max = {n_max} below 12")));
    }
    if !(u_eff > 0.0) {
        return Err(Error::domain(format!("U_eff = {u_eff} must be positive")));
    }
    Ok(PhaseHamiltonian {
        u_eff,
        k,
        p_eff,
        n_atoms,
        n_max,
    })
}

/// Symmetry class of an eigenvector under n → −n and, when K = 0, its
/// momentum parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelClass {
    /// ζ(−n) = ζ(n) (otherwise ζ(−n) = −ζ(n)).
    pub symmetric: bool,
    /// Some(true) for support on even n only, Some(false) for odd n only.
    pub even_n: Option<bool>,
}

/// Eigenpairs of ℋ in ascending order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QSpectrum {
    pub f_over_f0: Option<f64>,
    pub u_eff: f64,
    pub k: f64,
    pub p_eff: f64,
    pub n_atoms: f64,
    pub n_max: usize,
    pub energies: Vec<f64>,
    /// ζ_j(𝒩) for 𝒩 = −n_max..=n_max; real, normalized.
    pub vectors: Vec<Vec<f64>>,
    pub classes: Vec<LevelClass>,
}

impl QSpectrum {
    pub fn momenta(&self) -> impl Iterator<Item = i64> {
        let nm = self.n_max as i64;
        -nm..=nm
    }

    /// ψ_j(φ) = Σ ζ_j(n) e^{inφ}/√(2π).
    pub fn psi(&self, j: usize, phi: f64) -> Complex64 {
        psi_from(&self.vectors[j], self.n_max, phi)
    }

    pub fn gap(&self, j: usize) -> f64 {
        self.energies[j] - self.energies[0]
    }
}

fn psi_from(zeta: &[f64], n_max: usize, phi: f64) -> Complex64 {
    let nm = n_max as i64;
    zeta.iter()
        .enumerate()
        .map(|(i, &c)| Complex64::from_polar(c, (i as i64 - nm) as f64 * phi))
        .sum::<Complex64>()
        / (2.0 * PI).sqrt()
}

/// Basis vectors (as (n, coefficient) lists) of one symmetry block.
fn block_basis(n_max: usize, symmetric: bool, parity: Option<bool>) -> Vec<Vec<(i64, f64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let start = if symmetric { 0 } else { 1 };
    (start..=n_max as i64)
        .filter(|n| parity.is_none_or(|even| (n % 2 == 0) == even))
        .map(|n| match (n, symmetric) {
            (0, _) => vec![(0, 1.0)],
            (n, true) => vec![(n, s), (-n, s)],
            (n, false) => vec![(n, s), (-n, -s)],
        })
        .collect()
}

type Eigenpair = (f64, Vec<f64>, LevelClass);

fn solve_block(h: &PhaseHamiltonian, class: LevelClass) -> Result<Vec<Eigenpair>> {
    let basis = block_basis(h.n_max, class.symmetric, class.even_n);
    let d = basis.len();
    if d == 0 {
        return Ok(vec![]);
    }
    let m = Mat::<f64>::from_fn(d, d, |i, j| {
        basis[i]
            .iter()
            .flat_map(|&(a, ca)| basis[j].iter().map(move |&(b, cb)| ca * cb * h.element(a, b)))
            .sum::<f64>()
    });
    let eig = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen(f64::NAN))?;
    let (values, vectors) = (eig.S(), eig.U());
    let nm = h.n_max as i64;
    Ok((0..d)
        .map(|c| {
            let mut zeta = vec![0.0; h.dim()];
            for (i, b) in basis.iter().enumerate() {
                for &(n, cn) in b {
                    zeta[(n + nm) as usize] += cn * vectors[(i, c)];
                }
            }
            (values[c], zeta, class)
        })
        .collect())
}

/// Deterministic sign: ψ(0) > 0 when it is not negligible, otherwise the
/// largest coefficient positive.
fn fix_sign(zeta: &mut [f64]) {
    let at_zero: f64 = zeta.iter().sum();
    let big = zeta.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    let s = if at_zero.abs() > 1e-8 { at_zero } else { big };
    if s < 0.0 {
        zeta.iter_mut().for_each(|c| *c = -*c);
    }
}

fn solve_once(h: &PhaseHamiltonian) -> Result<Vec<Eigenpair>> {
    let parities: &[Option<bool>] = if h.k == 0.0 { &[Some(true), Some(false)] } else { &[None] };
    let mut all = Vec::new();
    for &symmetric in &[true, false] {
        for &even_n in parities {
            all.extend(solve_block(h, LevelClass { symmetric, even_n })?);
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    for v in all.iter_mut() {
        fix_sign(&mut v.1);
    }
    Ok(all)
}

/// Lowest `count` eigenpairs, doubling n_max until the lowest
/// max(count, 8) eigenvalues move by less than 10⁻¹⁰ relative.
pub fn eigensolve(h: &PhaseHamiltonian, count: usize) -> Result<QSpectrum> {
    let check = count.max(8);
    if count > 2 * h.n_max - 3 {
        return Err(Error::domain(format!("{count} levels requested from n_max = {}", h.n_max)));
    }
    let mut cur = h.clone();
    let mut prev = solve_once(&cur)?;
    loop {
        let next_h = cur.with_n_max(cur.n_max * 2);
        let next = solve_once(&next_h)?;
        let worst = (0..check.min(prev.len()))
            .map(|j| (next[j].0 - prev[j].0).abs() / next[j].0.abs().max(h.u_eff))
            .fold(0.0, f64::max);
        if worst < CONVERGENCE_TOL {
            break;
        }
        if next_h.n_max >= MAX_N_MAX {
            return Err(Error::Eigen(worst));
        }
        cur = next_h;
        prev = next;
    }
    let take: Vec<_> = prev.into_iter().take(count).collect();
    Ok(QSpectrum {
        f_over_f0: None,
        u_eff: h.u_eff,
        k: h.k,
        p_eff: h.p_eff,
        n_atoms: h.n_atoms,
        n_max: cur.n_max,
        energies: take.iter().map(|t| t.0).collect(),
        vectors: take.iter().map(|t| t.1.clone()).collect(),
        classes: take.iter().map(|t| t.2).collect(),
    })
}

/// Spectrum of the curve's Hamiltonian at one frequency.
pub fn spectrum_at(curve: &dyn ParamCurve, f_over_f0: f64, n_max: usize, count: usize) -> Result<QSpectrum> {
    let p = curve.params(f_over_f0);
    let h = build_matrix(p.u_eff, p.k, p.p_eff, p.n_atoms, n_max)?;
    let mut s = eigensolve(&h, count)?;
    s.f_over_f0 = Some(f_over_f0);
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MathieuLabel {
    Ce(usize),
    Se(usize),
}

/// Characteristic numbers a of y'' + (a − 2q cos 2ϕ)y = 0 with ϕ = φ + π/2,
/// ascending, labelled ce/se by symmetry class.
pub fn mathieu_characteristics(q: f64, count: usize) -> Result<Vec<(f64, MathieuLabel)>> {
    if !(q >= 0.0) {
        return Err(Error::domain(format!("q = {q} must be non-negative")));
    }
    // U_eff = 1, N = 1, NP_eff/8 = −q
    let h = build_matrix(1.0, 0.0, -8.0 * q, 1.0, DEFAULT_N_MAX.max(count + 4))?;
    let s = eigensolve(&h, count)?;
    let mut seen = [0usize; 4];
    Ok(s.energies
        .iter()
        .zip(&s.classes)
        .map(|(&a, c)| {
            // e^{inφ} = (−i)ⁿ e^{inϕ}: odd-n symmetric vectors are sine-type in ϕ
            let (slot, label) = match (c.even_n.expect("K = 0 blocks carry parity"), c.symmetric) {
                (true, true) => (0, MathieuLabel::Ce(2 * seen[0])),
                (true, false) => (1, MathieuLabel::Se(2 * seen[1] + 2)),
                (false, true) => (2, MathieuLabel::Se(2 * seen[2] + 1)),
                (false, false) => (3, MathieuLabel::Ce(2 * seen[3] + 1)),
            };
            seen[slot] += 1;
            (a, label)
        })
        .collect())
}

/// Δa ≈ 4√(2/π)(16q)^{3/4} e^{−4√q}, valid for q ≳ 1.
pub fn asymptotic_gap(q: f64) -> f64 {
    4.0 * (2.0 / PI).sqrt() * (16.0 * q).powf(0.75) * (-4.0 * q.sqrt()).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumDistribution {
    pub n: Vec<i64>,
    pub prob: Vec<f64>,
    pub even_weight: f64,
    pub odd_weight: f64,
}

pub fn momentum_distribution(spec: &QSpectrum, j: usize) -> Result<MomentumDistribution> {
    let v = spec
        .vectors
        .get(j)
        .ok_or_else(|| Error::domain(format!("level {j} not computed")))?;
    Ok(distribution_of(v, spec.n_max))
}

fn distribution_of(v: &[f64], n_max: usize) -> MomentumDistribution {
    let nm = n_max as i64;
    let n: Vec<i64> = (-nm..=nm).collect();
    let prob: Vec<f64> = v.iter().map(|c| c * c).collect();
    let even_weight = n.iter().zip(&prob).filter(|(n, _)| *n % 2 == 0).map(|(_, p)| p).sum();
    let odd_weight = n.iter().zip(&prob).filter(|(n, _)| *n % 2 != 0).map(|(_, p)| p).sum();
    MomentumDistribution {
        n,
        prob,
        even_weight,
        odd_weight,
    }
}

/// ψ∓ = (ψ₀ ± ψ₁)/√2 as momentum coefficients: ψ₋ localized at φ = 0, ψ₊
/// at φ = π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistentStates {
    pub n_max: usize,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl PersistentStates {
    pub fn psi_minus(&self, phi: f64) -> Complex64 {
        psi_from(&self.minus, self.n_max, phi)
    }

    pub fn psi_plus(&self, phi: f64) -> Complex64 {
        psi_from(&self.plus, self.n_max, phi)
    }
}

pub fn persistent_states(spec: &QSpectrum) -> Result<PersistentStates> {
    if spec.k != 0.0 || spec.vectors.len() < 2 {
        return Err(Error::domain("persistent states need the two lowest K = 0 levels"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = (&spec.vectors[0], &spec.vectors[1]);
    Ok(PersistentStates {
        n_max: spec.n_max,
        minus: a.iter().zip(b).map(|(x, y)| (x + y) * s).collect(),
        plus: a.iter().zip(b).map(|(x, y)| (x - y) * s).collect(),
    })
}

/// ⟨a| cos φ |b⟩ for momentum coefficient vectors.
pub fn cos_element(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    0.5 * (0..n - 1).map(|i| a[i] * b[i + 1] + a[i + 1] * b[i]).sum::<f64>()
}

/// ⟨a| cos 2φ |b⟩.
fn cos2_element(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    0.5 * (0..n - 2).map(|i| a[i] * b[i + 2] + a[i + 2] * b[i]).sum::<f64>()
}

/// Two-level reduction of one adjacent pair of K = 0 levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevel {
    pub e_lower: f64,
    pub e_upper: f64,
    /// E_{j,j+1} = −NK⟨ψ⁰_j|cos φ|ψ⁰_{j+1}⟩.
    pub coupling: f64,
    /// Weight of ψ₋ in the lower state.
    pub a: f64,
}

/// A for unperturbed gap ΔE and coupling E₀₁.
pub fn superposition_coefficient(delta_e: f64, coupling: f64) -> f64 {
    let r = (delta_e * delta_e + 4.0 * coupling * coupling).sqrt();
    delta_e / (delta_e * delta_e + (2.0 * coupling + r).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReduction {
    /// Pairs (0,1), (2,3), … of the K = 0 spectrum.
    pub pairs: Vec<TwoLevel>,
    /// |E₀₁|/(E⁰₂ − E⁰₁).
    pub decoupling_ratio: f64,
}

/// Largest |E₀₁|/(E⁰₂ − E⁰₁) accepted by `block_reduction`.
pub const MAX_DECOUPLING_RATIO: f64 = 0.5;

pub fn block_reduction(spec0: &QSpectrum, k: f64, n_atoms: f64) -> Result<BlockReduction> {
    if spec0.k != 0.0 {
        return Err(Error::domain("block reduction needs the K = 0 spectrum"));
    }
    let e = &spec0.energies;
    let v = &spec0.vectors;
    let pairs: Vec<TwoLevel> = (0..e.len() / 2)
        .map(|p| {
            let (j, l) = (2 * p, 2 * p + 1);
            let c = -n_atoms * k * cos_element(&v[j], &v[l]);
            let mean = 0.5 * (e[j] + e[l]);
            let r = (0.25 * (e[l] - e[j]).powi(2) + c * c).sqrt();
            TwoLevel {
                e_lower: mean - r,
                e_upper: mean + r,
                coupling: c,
                a: superposition_coefficient(e[l] - e[j], c),
            }
        })
        .collect();
    let ratio = match (pairs.first(), e.get(2)) {
        (Some(p), Some(&e2)) => p.coupling.abs() / (e2 - e[1]),
        _ => return Err(Error::domain("block reduction needs at least three levels")),
    };
    if ratio > MAX_DECOUPLING_RATIO {
        return Err(Error::domain(format!("blocks do not decouple: |E01|/(E2-E1) = {ratio:.3}")));
    }
    Ok(BlockReduction {
        pairs,
        decoupling_ratio: ratio,
    })
}

/// ⟨Î⟩₀ = I_p(1 − 2A²), ⟨Î⟩₁ = −⟨Î⟩₀.
pub fn mean_currents(a: f64, i_p: f64) -> (f64, f64) {
    let i = i_p * (1.0 - 2.0 * a * a);
    (i, -i)
}

/// Stationary currents per particle, I_j = −(1/2πħN) ∂E_j/∂(f/f₀), of
/// levels tracked by eigenvector overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurrents {
    pub f_over_f0: Vec<f64>,
    /// energies[level][sample], following the tracked level.
    pub energies: Vec<Vec<f64>>,
    pub currents: Vec<Vec<f64>>,
}

/// Two overlaps closer than this make the tracking ambiguous.
pub const TRACKING_AMBIGUITY: f64 = 1e-3;

pub fn level_currents(spectra: &[QSpectrum], levels: usize) -> Result<LevelCurrents> {
    let m = spectra.len();
    if m < 3 {
        return Err(Error::domain("level currents need at least three frequencies"));
    }
    let f: Vec<f64> = spectra
        .iter()
        .map(|s| s.f_over_f0.ok_or_else(|| Error::domain("spectrum without frequency")))
        .collect::<Result<_>>()?;
    let h = f[1] - f[0];
    if !(h > 0.0) || f.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) + 1e-15) {
        return Err(Error::domain("level currents need a uniform increasing frequency grid"));
    }
    if spectra.iter().any(|s| s.energies.len() < levels || s.n_max != spectra[0].n_max) {
        return Err(Error::domain("spectra must share n_max and hold the tracked levels"));
    }
    let mut index: Vec<usize> = (0..levels).collect();
    let mut energies = vec![vec![0.0; m]; levels];
    for (j, e) in energies.iter_mut().enumerate() {
        e[0] = spectra[0].energies[index[j]];
    }
    for i in 1..m {
        let (a, b) = (&spectra[i - 1], &spectra[i]);
        let mut next = Vec::with_capacity(levels);
        for &k in &index {
            let mut ov: Vec<(f64, usize)> = b
                .vectors
                .iter()
                .enumerate()
                .map(|(c, v)| (a.vectors[k].iter().zip(v).map(|(x, y)| x * y).sum::<f64>().abs(), c))
                .collect();
            ov.sort_by(|x, y| y.0.total_cmp(&x.0));
            if ov[0].0 < 0.5 {
                return Err(Error::domain(format!(
                    "a tracked level left the {} computed levels at f/f0 = {:.6}",
                    b.vectors.len(),
                    f[i]
                )));
            }
            if ov.len() > 1 && ov[0].0 - ov[1].0 < TRACKING_AMBIGUITY {
                return Err(Error::AmbiguousTracking {
                    f: f[i],
                    a: ov[0].0,
                    b: ov[1].0,
                });
            }
            next.push(ov[0].1);
        }
        index = next;
        for (j, e) in energies.iter_mut().enumerate() {
            e[i] = b.energies[index[j]];
        }
    }
    let scale = -1.0 / (2.0 * PI * constants().hbar_over_kb * spectra[0].n_atoms);
    let currents = energies
        .iter()
        .map(|e| {
            (0..m)
                .map(|i| {
                    let d = if i == 0 {
                        (e[1] - e[0]) / h
                    } else if i == m - 1 {
                        (e[m - 1] - e[m - 2]) / h
                    } else {
                        (e[i + 1] - e[i - 1]) / (2.0 * h)
                    };
                    scale * d
                })
                .collect()
        })
        .collect();
    Ok(LevelCurrents {
        f_over_f0: f,
        energies,
        currents,
    })
}

/// I_j per particle from ∂E_j/∂f = ⟨ψ_j|∂ℋ/∂f|ψ_j⟩ (Hellmann–Feynman).
pub fn level_current_exact(curve: &dyn ParamCurve, spec: &QSpectrum, j: usize) -> Result<f64> {
    let f = spec.f_over_f0.ok_or_else(|| Error::domain("spectrum without frequency"))?;
    let h = 1e-6;
    let dk = (curve.k(f + h) - curve.k(f - h)) / (2.0 * h);
    let dp = (curve.p_eff(f + h) - curve.p_eff(f - h)) / (2.0 * h);
    let v = &spec.vectors[j];
    let de = spec.n_atoms * (-dk * cos_element(v, v) + 0.25 * dp * cos2_element(v, v));
    Ok(-de / (2.0 * PI * constants().hbar_over_kb * spec.n_atoms))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitOptions {
    pub n_max: usize,
    /// |⟨Î⟩| bound defining the parity-protected window, as a fraction of I_p.
    pub pp_fraction: f64,
    /// |1 − 2A²| beyond which a branch counts as localized for I_p.
    pub plateau_fraction: f64,
}

impl Default for QubitOptions {
    fn default() -> Self {
        QubitOptions {
            n_max: DEFAULT_N_MAX,
            pp_fraction: 0.6,
            plateau_fraction: 0.9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitReport {
    /// N|P_eff|/(8U_eff) at f₀/2.
    pub q: f64,
    /// ΔE₂/ΔE₁ at K = 0.
    pub quality: f64,
    /// πħ/ΔE₁ (s).
    pub t_osc_s: f64,
    /// πħ/(U_eff Δa) with the asymptotic Δa.
    pub t_osc_asymptotic_s: f64,
    pub delta_e1_nk: f64,
    pub delta_e2_nk: f64,
    /// Frequency where K(f) = 0, the centre of both windows.
    pub centre_f_over_f0: f64,
    pub delta_f_eqd_over_f0: f64,
    pub delta_f_pp_over_f0: f64,
    pub product_q_dfpp: f64,
    pub pp_edges: (f64, f64),
    /// Ground-state (even, odd) momentum-parity weights at the two window edges.
    pub parity_at_pp_edges: [(f64, f64); 2],
    pub i_p_per_n: f64,
    /// (1/2πħ)|dK/d(f/f₀)| at the centre.
    pub i_p_analytic_per_n: f64,
    /// ⟨ψ⁰₀|cos φ|ψ⁰₁⟩.
    pub cos_element_01: f64,
    pub n_max: usize,
    pub pp_fraction: f64,
}

/// 2|E₀₁|/ΔE₁ at which |1 − 2A²| equals `fraction`.
fn coupling_ratio_for(fraction: f64) -> f64 {
    let s = ((1.0 + fraction) / (1.0 - fraction)).sqrt();
    0.5 * (s - 1.0 / s)
}

/// Root of `g` moving outward from `x0` in direction `dir`: geometric
/// bracketing from `start`, then Illinois.
fn outward_root(g: &dyn Fn(f64) -> Result<f64>, x0: f64, dir: f64, start: f64, limit: f64) -> Result<f64> {
    let g0 = g(x0)?;
    let mut prev = 0.0;
    let mut d = start;
    while d <= limit {
        let v = g(x0 + dir * d)?;
        if v.signum() != g0.signum() {
            let (a, b) = (x0 + dir * prev, x0 + dir * d);
            let (root, _) = illinois(g, a.min(b), a.max(b), 1e-7 * (d - prev), 200)?;
            return Ok(root);
        }
        prev = d;
        d *= 2.0;
    }
    Err(Error::Bracket {
        a: x0,
        b: x0 + dir * limit,
        fa: g0,
        fb: g(x0 + dir * limit)?,
    })
}

/// Qubit metrics from a parameter curve.
pub fn qubit_report(curve: &dyn ParamCurve, opts: &QubitOptions) -> Result<QubitReport> {
    let hbar = constants().hbar_over_kb;
    let n = curve.n_atoms();
    let u = curve.u_eff();
    // K(f) root near f₀/2
    let centre = if curve.k(0.5) == 0.0 {
        0.5
    } else {
        illinois(|f| Ok(curve.k(f)), 0.4, 0.6, 1e-13, 200)?.0
    };
    let p_half = curve.p_eff(centre);
    if !(p_half < 0.0) {
        return Err(Error::domain(format!("P_eff = {p_half:.4e} at the centre is not negative")));
    }
    let q = n * p_half.abs() / (8.0 * u);
    let h0 = build_matrix(u, 0.0, p_half, n, opts.n_max)?;
    let s0 = eigensolve(&h0, 8)?;
    let (de1, de2) = (s0.gap(1), s0.gap(2));
    let c01 = cos_element(&s0.vectors[0], &s0.vectors[1]);

    // interval where both minima exist bounds all searches
    let half_width = {
        let g = |f: f64| Ok(curve.k(f).abs() - curve.p_eff(f).abs());
        let lo = outward_root(&g, centre, -1.0, 1e-6, 0.5).unwrap_or(0.0);
        let hi = outward_root(&g, centre, 1.0, 1e-6, 0.5).unwrap_or(1.0);
        (centre - lo).min(hi - centre)
    };

    // |E₀₁| = x ΔE₁/2 from the K = 0 coupling element; P_eff varies slowly
    let k_for = |fraction: f64| coupling_ratio_for(fraction) * de1 / (2.0 * n * c01.abs());
    let pp_edge = |dir: f64, fraction: f64| {
        let target = k_for(fraction);
        let g = |f: f64| Ok(curve.k(f).abs() - target);
        outward_root(&g, centre, dir, 1e-14, half_width)
    };
    let (pp_lo, pp_hi) = (pp_edge(-1.0, opts.pp_fraction)?, pp_edge(1.0, opts.pp_fraction)?);

    let eqd = |f: f64| -> Result<f64> {
        let s = spectrum_at(curve, f, opts.n_max, 3)?;
        Ok((s.energies[2] - s.energies[1]) - (s.energies[1] - s.energies[0]))
    };
    let (eqd_lo, eqd_hi) = (
        outward_root(&eqd, centre, -1.0, 1e-12, half_width)?,
        outward_root(&eqd, centre, 1.0, 1e-12, half_width)?,
    );

    let parity = |f: f64| -> Result<(f64, f64)> {
        let s = spectrum_at(curve, f, opts.n_max, 2)?;
        let d = momentum_distribution(&s, 0)?;
        Ok((d.even_weight, d.odd_weight))
    };
    let parity_at_pp_edges = [parity(pp_lo)?, parity(pp_hi)?];

    // plateau current just outside the |1 − 2A²| = plateau_fraction window
    let (pl_lo, pl_hi) = (pp_edge(-1.0, opts.plateau_fraction)?, pp_edge(1.0, opts.plateau_fraction)?);
    let d = 0.05 * (pl_hi - pl_lo);
    let mut ip = 0.0;
    for f in [pl_lo - d, pl_hi + d] {
        let s = spectrum_at(curve, f, opts.n_max, 2)?;
        ip += 0.5 * level_current_exact(curve, &s, 0)?.abs();
    }
    let dk = (curve.k(centre + 1e-6) - curve.k(centre - 1e-6)) / 2e-6;

    let dfpp = pp_hi - pp_lo;
    let quality = de2 / de1;
    Ok(QubitReport {
        q,
        quality,
        t_osc_s: PI * hbar / de1,
        t_osc_asymptotic_s: PI * hbar / (u * asymptotic_gap(q)),
        delta_e1_nk: de1,
        delta_e2_nk: de2,
        centre_f_over_f0: centre,
        delta_f_eqd_over_f0: eqd_hi - eqd_lo,
        delta_f_pp_over_f0: dfpp,
        product_q_dfpp: quality * dfpp,
        pp_edges: (pp_lo, pp_hi),
        parity_at_pp_edges,
        i_p_per_n: ip,
        i_p_analytic_per_n: dk.abs() / (2.0 * PI * hbar),
        cos_element_01: c01,
        n_max: s0.n_max,
        pp_fraction: opts.pp_fraction,
    })
}

/// Spectra on a uniform grid, all at the n_max needed by the hardest point.
pub fn spectra_on_grid(curve: &dyn ParamCurve, f_over_f0: &[f64], n_max: usize, count: usize) -> Result<Vec<QSpectrum>> {
    let first: Vec<QSpectrum> = f_over_f0
        .iter()
        .map(|&f| spectrum_at(curve, f, n_max, count).map_err(|e| e.at_frequency(f)))
        .collect::<Result<_>>()?;
    let need = first.iter().map(|s| s.n_max).max().unwrap_or(n_max);
    if first.iter().all(|s| s.n_max == need) {
        return Ok(first);
    }
    f_over_f0
        .iter()
        .map(|&f| {
            let p = curve.params(f);
            let h = build_matrix(p.u_eff, p.k, p.p_eff, p.n_atoms, need)?;
            // eigensolve may only grow n_max, so solve directly at `need`
            let all = solve_once(&h)?;
            Ok(QSpectrum {
                f_over_f0: Some(f),
                u_eff: p.u_eff,
                k: p.k,
                p_eff: p.p_eff,
                n_atoms: p.n_atoms,
                n_max: need,
                energies: all.iter().take(count).map(|t| t.0).collect(),
                vectors: all.iter().take(count).map(|t| t.1.clone()).collect(),
                classes: all.iter().take(count).map(|t| t.2).collect(),
            })
        })
        .collect()
}

pub const SPECTRUM_LEVELS: usize = 8;
/// Levels solved for overlap tracking, so diabatic branches stay in view.
pub const TRACKING_LEVELS: usize = 24;
pub const CURRENT_LEVELS: usize = 5;

pub fn write_spectrum_csv(path: impl AsRef<Path>, spectra: &[QSpectrum]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let cols: Vec<String> = (0..SPECTRUM_LEVELS).map(|j| format!("E{j}_nK")).collect();
    writeln!(f, "f_over_f0,{}", cols.join(","))?;
    for s in spectra {
        let e: Vec<String> = s.energies.iter().take(SPECTRUM_LEVELS).map(|v| v.to_string()).collect();
        writeln!(f, "{},{}", s.f_over_f0.unwrap_or(f64::NAN), e.join(","))?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_levels_currents_csv(path: impl AsRef<Path>, lc: &LevelCurrents) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let cols: Vec<String> = (0..lc.currents.len()).map(|j| format!("I{j}_perN")).collect();
    writeln!(f, "f_over_f0,{}", cols.join(","))?;
    for (i, x) in lc.f_over_f0.iter().enumerate() {
        let v: Vec<String> = lc.currents.iter().map(|c| c[i].to_string()).collect();
        writeln!(f, "{},{}", x, v.join(","))?;
    }
    f.flush()?;
    Ok(())
}
