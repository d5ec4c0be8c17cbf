use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{normalize, project_half_turn, Grid2D};
use crate::units::{constants, coupling_2d, PhysConsts, ScenarioConfig};

/// V_ring(r) + V_barr(y) in nK.
pub fn potential(cfg: &ScenarioConfig, x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    let d = r - cfg.r0();
    let ring = cfg.v0() * (1.0 - (-2.0 * d * d / (cfg.w() * cfg.w())).exp());
    let lb = cfg.lambda_b();
    ring + cfg.vb() * (-(y * y) / (lb * lb)).exp()
}

/// Discretized rotating-frame mean-field Hamiltonian
/// H = −C∇² + V − ΩL_z + gN|Ψ|², with C = ħ²/2mk_B.
///
/// The kinetic and rotation terms are split per axis: along x the symbol is
/// C k_x² + (ħ/k_B)Ω y k_x, along y it is C k_y² − (ħ/k_B)Ω x k_y, so each
/// is diagonal after a 1D transform of rows (resp. columns).
pub struct GpSystem {
    pub grid: Grid2D,
    pub potential: Vec<f64>,
    /// g₂D·N in nK·µm².
    pub gn: f64,
    pub consts: PhysConsts,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl GpSystem {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let consts = constants();
        let g = coupling_2d(&consts, cfg.omega_z()).g2d;
        Self::with_coupling(cfg, g * cfg.n())
    }

    /// Same geometry with an explicit g₂D·N (0 gives the linear problem).
    pub fn with_coupling(cfg: &ScenarioConfig, gn: f64) -> Self {
        let grid = Grid2D::for_config(cfg);
        let n = grid.n;
        let mut pot = vec![0.0; grid.len()];
        for iy in 0..n {
            for ix in 0..n {
                pot[iy * n + ix] = potential(cfg, grid.x(ix), grid.y(iy));
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        GpSystem {
            k: grid.wavenumbers(),
            grid,
            potential: pot,
            gn,
            consts: constants(),
            fwd,
            inv,
        }
    }

    pub fn c_kin(&self) -> f64 {
        self.consts.hbar2_over_2mkb
    }

    pub fn hbar(&self) -> f64 {
        self.consts.hbar_over_kb
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Real-time step at which the kinetic phase of the corner wavevector,
    /// C(k_x² + k_y²)dt/ħ, reaches π. Split-step schemes for the nonlinear
    /// equation develop resonant instabilities beyond it.
    pub fn resonance_dt(&self) -> f64 {
        let kmax = self.k.iter().fold(0.0f64, |a, &k| a.max(k.abs()));
        std::f64::consts::PI * self.hbar() / (2.0 * self.c_kin() * kmax * kmax)
    }

    /// `dt` capped at 80% of [`Self::resonance_dt`].
    pub fn stable_real_dt(&self, dt: f64) -> f64 {
        dt.min(0.8 * self.resonance_dt())
    }

    pub(crate) fn fft_rows(&self, buf: &mut [Complex64], forward: bool) {
        if forward {
            self.fwd.process(buf);
        } else {
            self.inv.process(buf);
        }
    }

    /// Kinetic + rotation part (T − ΩL_z)ψ, added into `out`.
    fn add_kinetic(&self, psi: &[Complex64], omega: f64, out: &mut [Complex64]) {
        let n = self.grid.n;
        let c = self.c_kin();
        let hw = self.hbar() * omega;
        let scale = 1.0 / n as f64;

        let mut buf = psi.to_vec();
        self.fft_rows(&mut buf, true);
        for iy in 0..n {
            let y = self.grid.y(iy);
            let row = &mut buf[iy * n..(iy + 1) * n];
            for (v, &k) in row.iter_mut().zip(&self.k) {
                *v *= (c * k * k + hw * y * k) * scale;
            }
        }
        self.fft_rows(&mut buf, false);
        out.iter_mut().zip(&buf).for_each(|(o, b)| *o += b);

        transpose(psi, &mut buf, n);
        self.fft_rows(&mut buf, true);
        for ix in 0..n {
            let x = self.grid.x(ix);
            let col = &mut buf[ix * n..(ix + 1) * n];
            for (v, &k) in col.iter_mut().zip(&self.k) {
                *v *= (c * k * k - hw * x * k) * scale;
            }
        }
        self.fft_rows(&mut buf, false);
        for ix in 0..n {
            for iy in 0..n {
                out[iy * n + ix] += buf[ix * n + iy];
            }
        }
    }

    /// Full mean-field action [H₀ + gN|ψ|²]ψ.
    pub fn apply_h(&self, psi: &[Complex64], omega: f64) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = psi
            .iter()
            .zip(&self.potential)
            .map(|(p, v)| p * (v + self.gn * p.norm_sqr()))
            .collect();
        self.add_kinetic(psi, omega, &mut out);
        out
    }

    /// Linear part H₀ψ only.
    pub fn apply_h0(&self, psi: &[Complex64], omega: f64) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = psi.iter().zip(&self.potential).map(|(p, v)| p * v).collect();
        self.add_kinetic(psi, omega, &mut out);
        out
    }

    /// Energy per particle and chemical potential of a normalized ψ, plus
    /// H ψ for reuse.
    pub fn energetics(&self, psi: &[Complex64], omega: f64) -> Energetics {
        let da = self.grid.cell_area();
        let h0 = self.apply_h0(psi, omega);
        let lin: f64 = psi.iter().zip(&h0).map(|(p, h)| (p.conj() * h).re).sum::<f64>() * da;
        let quartic: f64 = psi.iter().map(|p| p.norm_sqr() * p.norm_sqr()).sum::<f64>() * da;
        let norm: f64 = psi.iter().map(|p| p.norm_sqr()).sum::<f64>() * da;
        let int = self.gn * quartic;
        let hpsi: Vec<Complex64> = h0
            .iter()
            .zip(psi)
            .map(|(h, p)| h + p * (self.gn * p.norm_sqr()))
            .collect();
        Energetics {
            energy: (lin + 0.5 * int) / norm,
            mu: (lin + int) / norm,
            hpsi,
        }
    }

    pub fn energy_per_particle(&self, psi: &[Complex64], omega: f64) -> f64 {
        self.energetics(psi, omega).energy
    }

    /// ‖Hψ − μψ‖ (nK) with μ = ⟨ψ,Hψ⟩.
    pub fn residual(&self, psi: &[Complex64], omega: f64) -> (f64, f64) {
        let e = self.energetics(psi, omega);
        let r: f64 = e
            .hpsi
            .iter()
            .zip(psi)
            .map(|(h, p)| (h - p * e.mu).norm_sqr())
            .sum::<f64>()
            * self.grid.cell_area();
        (r.sqrt(), e.mu)
    }
}

pub struct Energetics {
    pub energy: f64,
    pub mu: f64,
    pub hpsi: Vec<Complex64>,
}

/// dst[ix*n + iy] = src[iy*n + ix].
pub(crate) fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for by in (0..n).step_by(B) {
        for bx in (0..n).step_by(B) {
            for iy in by..(by + B).min(n) {
                for ix in bx..(bx + B).min(n) {
                    dst[ix * n + iy] = src[iy * n + ix];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    Real,
    Imaginary,
}

/// Strang-split propagator V/2 · X/2 · Y · X/2 · V/2 with precomputed
/// spectral factors; V includes the nonlinear term.
pub struct SplitStep<'a> {
    sys: &'a GpSystem,
    pub dt: f64,
    pub omega: f64,
    kind: TimeKind,
    x_half: Vec<Complex64>,
    y_full: Vec<Complex64>,
    tbuf: Vec<Complex64>,
}

impl<'a> SplitStep<'a> {
    pub fn new(sys: &'a GpSystem, omega: f64, dt: f64, kind: TimeKind) -> Self {
        let n = sys.grid.n;
        let c = sys.c_kin() / sys.hbar();
        let scale = 1.0 / n as f64;
        let factor = |theta: f64| -> Complex64 {
            match kind {
                TimeKind::Real => Complex64::from_polar(scale, -theta),
                TimeKind::Imaginary => Complex64::new(scale * (-theta).exp(), 0.0),
            }
        };
        let k = sys.wavenumbers();
        let mut x_half = vec![Complex64::new(0.0, 0.0); n * n];
        let mut y_full = vec![Complex64::new(0.0, 0.0); n * n];
        for a in 0..n {
            let y = sys.grid.y(a);
            let x = sys.grid.x(a);
            for m in 0..n {
                let km = k[m];
                x_half[a * n + m] = factor(0.5 * dt * (c * km * km + omega * y * km));
                y_full[a * n + m] = factor(dt * (c * km * km - omega * x * km));
            }
        }
        SplitStep {
            sys,
            dt,
            omega,
            kind,
            x_half,
            y_full,
            tbuf: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// exp(−i τ (V + gN|ψ|²)/ħ) with τ = frac·dt (or its imaginary-time
    /// counterpart).
    pub fn potential_step(&self, psi: &mut [Complex64], frac: f64) {
        let t = frac * self.dt / self.sys.hbar();
        let gn = self.sys.gn;
        match self.kind {
            TimeKind::Real => {
                for (p, v) in psi.iter_mut().zip(&self.sys.potential) {
                    let th = t * (v + gn * p.norm_sqr());
                    *p *= Complex64::from_polar(1.0, -th);
                }
            }
            TimeKind::Imaginary => {
                for (p, v) in psi.iter_mut().zip(&self.sys.potential) {
                    *p *= (-t * (v + gn * p.norm_sqr())).exp();
                }
            }
        }
    }

    fn x_half_step(&self, psi: &mut [Complex64]) {
        self.sys.fft_rows(psi, true);
        psi.iter_mut().zip(&self.x_half).for_each(|(p, f)| *p *= f);
        self.sys.fft_rows(psi, false);
    }

    /// X/2 · Y · X/2.
    pub fn kinetic_step(&mut self, psi: &mut [Complex64]) {
        let n = self.sys.grid.n;
        self.x_half_step(psi);
        transpose(psi, &mut self.tbuf, n);
        self.sys.fft_rows(&mut self.tbuf, true);
        self.tbuf.iter_mut().zip(&self.y_full).for_each(|(p, f)| *p *= f);
        self.sys.fft_rows(&mut self.tbuf, false);
        transpose(&self.tbuf, psi, n);
        self.x_half_step(psi);
    }

    /// `steps` real-time steps; consecutive potential half-steps are merged.
    pub fn advance(&mut self, psi: &mut [Complex64], steps: usize) {
        if steps == 0 {
            return;
        }
        self.potential_step(psi, 0.5);
        for s in 0..steps {
            self.kinetic_step(psi);
            if s + 1 < steps {
                self.potential_step(psi, 1.0);
            }
        }
        self.potential_step(psi, 0.5);
    }

    /// One renormalized imaginary-time step, optionally projected onto a
    /// half-turn parity sector.
    pub fn relax_step(&mut self, psi: &mut [Complex64], parity: Option<i32>) {
        self.potential_step(psi, 0.5);
        self.kinetic_step(psi);
        self.potential_step(psi, 0.5);
        if let Some(p) = parity {
            project_half_turn(psi, p);
        }
        normalize(&self.sys.grid, psi);
    }
}
