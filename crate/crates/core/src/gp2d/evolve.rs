use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::norm2;
use super::state::{tm_projection, LocalizedModes, OrderParameter};
use super::system::{transpose, GpSystem, SplitStep, TimeKind};
use crate::error::{Error, Result};

/// Portion of the line y = 0 over which the current is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutSegment {
    /// Whole line: net transfer from the lower to the upper half.
    Full,
    /// x > 0: current through the right junction, positive counterclockwise.
    Right,
    /// x < 0: current through the left junction, positive counterclockwise.
    Left,
}

/// ∫ dx |Ψ|²[(ħ/m)∂_y arg Ψ − Ωx] along y = 0, per particle (s⁻¹).
pub fn cut_current(sys: &GpSystem, psi: &[Complex64], omega: f64, segment: CutSegment) -> f64 {
    let grid = &sys.grid;
    let n = grid.n;
    let c = grid.center();
    let k = sys.wavenumbers();
    let mut buf = vec![Complex64::new(0.0, 0.0); psi.len()];
    transpose(psi, &mut buf, n);
    sys.fft_rows(&mut buf, true);
    let scale = 1.0 / n as f64;
    for col in buf.chunks_mut(n) {
        col.iter_mut()
            .zip(k)
            .for_each(|(v, &km)| *v *= Complex64::new(0.0, km * scale));
    }
    sys.fft_rows(&mut buf, false);

    let hm = sys.consts.hbar_over_m;
    let mut total = 0.0;
    for ix in 0..n {
        let x = grid.x(ix);
        let p = psi[c * n + ix];
        let dy = buf[ix * n + c];
        let j = hm * (p.conj() * dy).im - omega * x * p.norm_sqr();
        let side = |inside: bool| if ix == c { 0.5 } else if inside { 1.0 } else { 0.0 };
        let w = match segment {
            CutSegment::Full => 1.0,
            CutSegment::Right => side(ix > c),
            CutSegment::Left => -side(ix < c),
        };
        total += w * j;
    }
    total * grid.dx
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between observer calls.
    pub sample_every: usize,
    pub norm_tol: f64,
    pub energy_tol: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_final: f64, sample_every: usize) -> Self {
        EvolveOptions {
            dt,
            t_final,
            sample_every: sample_every.max(1),
            norm_tol: 1e-6,
            energy_tol: 1e-4,
        }
    }
}

/// Real-time propagation in the rotating frame.
///
/// `observe(t, ψ, energy)` runs at t = 0 and every `sample_every` steps;
/// returning `false` stops the run early. Norm and energy drift are checked
/// at each sample.
pub fn evolve_real<F>(
    sys: &GpSystem,
    init: &OrderParameter,
    omega: f64,
    opts: &EvolveOptions,
    mut observe: F,
) -> Result<OrderParameter>
where
    F: FnMut(f64, &[Complex64], f64) -> Result<bool>,
{
    let grid = &sys.grid;
    if opts.dt >= sys.resonance_dt() {
        return Err(Error::Unstable(format!(
            "dt = {:.3e} s is beyond the split-step resonance limit {:.3e} s for this grid",
            opts.dt,
            sys.resonance_dt()
        )));
    }
    let mut psi = init.psi.clone();
    let n0 = norm2(grid, &psi);
    let e0 = sys.energy_per_particle(&psi, omega);
    let total = (opts.t_final / opts.dt).round() as usize;
    let mut prop = SplitStep::new(sys, omega, opts.dt, TimeKind::Real);
    let mut done = 0;
    let mut go = observe(0.0, &psi, e0)?;
    while go && done < total {
        let chunk = opts.sample_every.min(total - done);
        prop.advance(&mut psi, chunk);
        done += chunk;
        let t = done as f64 * opts.dt;
        let nrm = norm2(grid, &psi);
        if !nrm.is_finite() || (nrm - n0).abs() > opts.norm_tol {
            return Err(Error::Unstable(format!("norm drift {:.3e} at t = {t:.5} s", nrm - n0)));
        }
        let e = sys.energy_per_particle(&psi, omega);
        if !e.is_finite() || ((e - e0) / e0).abs() > opts.energy_tol {
            return Err(Error::Unstable(format!(
                "relative energy drift {:.3e} at t = {t:.5} s",
                (e - e0) / e0
            )));
        }
        go = observe(t, &psi, e)?;
    }
    Ok(OrderParameter {
        grid: grid.clone(),
        psi,
        omega,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t_s: f64,
    pub z: f64,
    pub phi_rad: f64,
    pub energy_nk: f64,
    /// Net lower→upper transfer current per particle (s⁻¹).
    pub current_per_particle: f64,
    pub subspace_norm2: f64,
}

/// Two-mode observables sampled along a real-time run. `stop` may end the
/// run early given the samples so far.
pub fn tm_time_series(
    sys: &GpSystem,
    init: &OrderParameter,
    omega: f64,
    modes: &LocalizedModes,
    opts: &EvolveOptions,
    mut stop: impl FnMut(&[TimeSample]) -> bool,
) -> Result<Vec<TimeSample>> {
    let mut out = Vec::new();
    evolve_real(sys, init, omega, opts, |t, psi, e| {
        let p = tm_projection(psi, modes);
        out.push(TimeSample {
            t_s: t,
            z: p.z,
            phi_rad: p.phi,
            energy_nk: e,
            current_per_particle: cut_current(sys, psi, omega, CutSegment::Full),
            subspace_norm2: p.subspace_norm2,
        });
        Ok(!stop(&out))
    })?;
    Ok(out)
}

pub const TIME_SERIES_HEADER: &str = "t_s,Z,phi_rad,energy_nK,current_per_particle";

pub fn write_time_series(path: impl AsRef<Path>, samples: &[TimeSample]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{TIME_SERIES_HEADER}")?;
    for s in samples {
        writeln!(
            f,
            "{},{},{},{},{}",
            s.t_s, s.z, s.phi_rad, s.energy_nk, s.current_per_particle
        )?;
    }
    f.flush()?;
    Ok(())
}
