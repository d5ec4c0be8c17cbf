use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{inner, norm2, normalize, Grid2D};
use crate::error::{Error, Result};
use crate::units::ScenarioConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderParameter {
    pub grid: Grid2D,
    pub psi: Vec<Complex64>,
    /// Frame rotation rate (rad/s).
    pub omega: f64,
}

impl OrderParameter {
    pub fn norm2(&self) -> f64 {
        norm2(&self.grid, &self.psi)
    }

    pub fn normalize(&mut self) {
        normalize(&self.grid, &mut self.psi);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "phi", rename_all = "snake_case")]
pub enum PhaseLabel {
    Zero,
    Pi,
    Other(f64),
}

impl PhaseLabel {
    /// Classify a phase difference; within `tol` of 0 or ±π.
    pub fn from_phase(phi: f64, tol: f64) -> Self {
        if phi.abs() < tol {
            PhaseLabel::Zero
        } else if (phi.abs() - PI).abs() < tol {
            PhaseLabel::Pi
        } else {
            PhaseLabel::Other(phi)
        }
    }
}

/// Converged solution of the stationary mean-field equation.
#[derive(Debug, Clone)]
pub struct StationaryState {
    pub psi: OrderParameter,
    /// Chemical potential (nK).
    pub mu: f64,
    pub energy_per_particle: f64,
    pub winding: i32,
    pub phase_label: PhaseLabel,
    /// arg Ψ(0, r₀) − arg Ψ(0, −r₀).
    pub phase_estimate: f64,
    /// ‖Hψ − μψ‖ / |μ|.
    pub residual: f64,
    pub imaginary_steps: usize,
    pub polish_iterations: usize,
}

/// Orthonormal pair of modes localized in the upper (y > 0) and lower ring
/// halves.
#[derive(Debug, Clone)]
pub struct LocalizedModes {
    pub grid: Grid2D,
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

impl LocalizedModes {
    pub fn check_orthonormal(&self, tol: f64) -> Result<()> {
        let uu = norm2(&self.grid, &self.upper);
        let ll = norm2(&self.grid, &self.lower);
        let ul = inner(&self.grid, &self.upper, &self.lower).norm();
        if (uu - 1.0).abs() > tol || (ll - 1.0).abs() > tol || ul > tol {
            return Err(Error::ModesNotOrthonormal(format!(
                "|ψu|² = {uu:.3e}, |ψl|² = {ll:.3e}, |⟨ψu,ψl⟩| = {ul:.3e}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmProjection {
    pub z: f64,
    pub phi: f64,
    pub subspace_norm2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    /// Ring profile with a phase imprint e^{inθ}.
    Winding(i32),
    /// Two-mode state from localized modes.
    TwoMode { z: f64, phi: f64 },
}

/// Thomas–Fermi-like ring profile times e^{inθ}, normalized.
pub fn winding_seed(cfg: &ScenarioConfig, grid: &Grid2D, winding: i32, omega: f64) -> OrderParameter {
    let n = grid.n;
    let mut psi = vec![Complex64::new(0.0, 0.0); grid.len()];
    let level = 0.5 * cfg.v0();
    for iy in 0..n {
        for ix in 0..n {
            let (x, y) = (grid.x(ix), grid.y(iy));
            let d = x.hypot(y) - cfg.r0();
            let ring = cfg.v0() * (1.0 - (-2.0 * d * d / (cfg.w() * cfg.w())).exp());
            let rho = (level - ring).max(0.0);
            let theta = y.atan2(x);
            psi[iy * n + ix] = Complex64::from_polar(rho.sqrt(), winding as f64 * theta);
        }
    }
    let mut op = OrderParameter {
        grid: grid.clone(),
        psi,
        omega,
    };
    op.normalize();
    op
}

/// Ψ_TM = [e^{iφ}ψ_u√(1−Z) + ψ_l√(1+Z)]/√2.
pub fn two_mode_state(modes: &LocalizedModes, z: f64, phi: f64, omega: f64) -> Result<OrderParameter> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::domain(format!("imbalance {z} outside [-1, 1]")));
    }
    modes.check_orthonormal(1e-6)?;
    let cu = Complex64::from_polar(((1.0 - z) / 2.0).sqrt(), phi);
    let cl = ((1.0 + z) / 2.0).sqrt();
    let psi = modes
        .upper
        .iter()
        .zip(&modes.lower)
        .map(|(u, l)| u * cu + l * cl)
        .collect();
    Ok(OrderParameter {
        grid: modes.grid.clone(),
        psi,
        omega,
    })
}

pub fn make_initial(
    cfg: &ScenarioConfig,
    grid: &Grid2D,
    kind: InitialKind,
    modes: Option<&LocalizedModes>,
    omega: f64,
) -> Result<OrderParameter> {
    match kind {
        InitialKind::Winding(w) => Ok(winding_seed(cfg, grid, w, omega)),
        InitialKind::TwoMode { z, phi } => {
            let modes = modes.ok_or_else(|| Error::domain("two-mode initial state needs localized modes"))?;
            two_mode_state(modes, z, phi, omega)
        }
    }
}

/// Integer phase circulation along the circle of radius `radius`.
pub fn winding_number(grid: &Grid2D, psi: &[Complex64], radius: f64) -> i32 {
    const SAMPLES: usize = 720;
    let mut total = 0.0;
    let at = |k: usize| {
        let t = 2.0 * PI * k as f64 / SAMPLES as f64;
        grid.interpolate(psi, radius * t.cos(), radius * t.sin())
    };
    let mut prev = at(0);
    for k in 1..=SAMPLES {
        let cur = at(k % SAMPLES);
        total += (cur * prev.conj()).arg();
        prev = cur;
    }
    (total / (2.0 * PI)).round() as i32
}

/// Pointwise phase difference arg Ψ(0, r₀) − arg Ψ(0, −r₀), in (−π, π].
pub fn pointwise_phase(grid: &Grid2D, psi: &[Complex64], r0: f64) -> f64 {
    let up = grid.interpolate(psi, 0.0, r0);
    let down = grid.interpolate(psi, 0.0, -r0);
    wrap_phase((up * down.conj()).arg())
}

pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Projection onto the two-mode plane.
pub fn tm_projection(psi: &[Complex64], modes: &LocalizedModes) -> TmProjection {
    let au = inner(&modes.grid, &modes.upper, psi);
    let al = inner(&modes.grid, &modes.lower, psi);
    let (nu, nl) = (au.norm_sqr(), al.norm_sqr());
    let s = nu + nl;
    let z = if s > 0.0 { (nl - nu) / s } else { 0.0 };
    let phi = if s > 0.0 { wrap_phase((au * al.conj()).arg()) } else { 0.0 };
    TmProjection {
        z,
        phi,
        subspace_norm2: s / norm2(&modes.grid, psi),
    }
}

/// φ = arg(⟨ψ_u,Ψ⟩ / ⟨ψ_l,Ψ⟩).
pub fn phase_difference(psi: &[Complex64], modes: &LocalizedModes) -> Result<f64> {
    let au = inner(&modes.grid, &modes.upper, psi);
    let al = inner(&modes.grid, &modes.lower, psi);
    let m = au.norm().min(al.norm());
    if m < 1e-12 {
        return Err(Error::ProjectionUndefined(m));
    }
    Ok(wrap_phase((au * al.conj()).arg()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(41, 8.0)
    }

    fn blob(grid: &Grid2D, y0: f64) -> Vec<Complex64> {
        let n = grid.n;
        let mut v = vec![Complex64::new(0.0, 0.0); n * n];
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = (grid.x(ix), grid.y(iy) - y0);
                v[iy * n + ix] = Complex64::new((-(x * x + y * y)).exp(), 0.0);
            }
        }
        normalize(grid, &mut v);
        v
    }

    fn modes() -> LocalizedModes {
        let g = grid();
        LocalizedModes {
            upper: blob(&g, 4.0),
            lower: blob(&g, -4.0),
            grid: g,
        }
    }

    #[test]
    fn phase_label_classification() {
        assert_eq!(PhaseLabel::from_phase(0.01, 0.05), PhaseLabel::Zero);
        assert_eq!(PhaseLabel::from_phase(-3.12, 0.05), PhaseLabel::Pi);
        assert_eq!(PhaseLabel::from_phase(1.0, 0.05), PhaseLabel::Other(1.0));
    }

    #[test]
    fn two_mode_round_trip() {
        let m = modes();
        for (z, phi) in [(0.0, 0.0), (0.3, PI / 3.0), (-0.7, -2.0), (0.0, PI)] {
            let s = two_mode_state(&m, z, phi, 0.0).unwrap();
            let p = tm_projection(&s.psi, &m);
            assert!((p.z - z).abs() < 1e-12);
            assert!((p.subspace_norm2 - 1.0).abs() < 1e-10);
            assert!(wrap_phase(p.phi - phi).abs() < 1e-12);
            assert!(wrap_phase(phase_difference(&s.psi, &m).unwrap() - phi).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_state_has_no_projection() {
        let m = modes();
        let other = blob(&m.grid, 0.0);
        // blob at the origin overlaps the others by e^{-8}; tiny but not zero
        assert!(tm_projection(&other, &m).subspace_norm2 < 1e-6);
        let zero = vec![Complex64::new(0.0, 0.0); m.grid.len()];
        assert!(matches!(phase_difference(&zero, &m), Err(Error::ProjectionUndefined(_))));
    }

    #[test]
    fn rejects_non_orthonormal_modes() {
        let mut m = modes();
        m.lower = m.upper.clone();
        assert!(matches!(two_mode_state(&m, 0.0, 0.0, 0.0), Err(Error::ModesNotOrthonormal(_))));
    }

    #[test]
    fn winding_of_imprint() {
        let g = grid();
        let n = g.n;
        for w in [-2, 0, 1, 3] {
            let mut v = vec![Complex64::new(0.0, 0.0); n * n];
            for iy in 0..n {
                for ix in 0..n {
                    let (x, y) = (g.x(ix), g.y(iy));
                    v[iy * n + ix] = Complex64::from_polar(1.0, w as f64 * y.atan2(x));
                }
            }
            assert_eq!(winding_number(&g, &v, 4.0), w);
        }
    }
}
