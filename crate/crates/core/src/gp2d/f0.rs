use serde::{Deserialize, Serialize};

use super::evolve::{cut_current, CutSegment};
use super::relax::{pi_state, RelaxOptions};
use super::state::OrderParameter;
use super::system::GpSystem;
use crate::error::{Error, Result};
use crate::units::{f0_one_dim, ScenarioConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct F0Result {
    pub f0_hz: f64,
    pub f0_one_dim_hz: f64,
    pub evaluations: usize,
}

/// Illinois (modified regula falsi) root of `f` on [a, b]; stops when the
/// bracket is narrower than `xtol` or two successive estimates differ by
/// less than `xtol`.
pub fn illinois<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut evals = 2;
    if fa == 0.0 {
        return Ok((a, evals));
    }
    if fb == 0.0 {
        return Ok((b, evals));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { a, b, fa, fb });
    }
    let mut side = 0i8;
    let mut prev: Option<f64> = None;
    for _ in 0..max_iter {
        if (b - a).abs() < xtol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        // keep the step strictly inside and shrinking
        let lo = a.min(b) + 0.05 * xtol;
        let hi = a.max(b) - 0.05 * xtol;
        c = c.clamp(lo, hi);
        if prev.is_some_and(|p| (p - c).abs() < xtol) {
            return Ok((c, evals));
        }
        prev = Some(c);
        let fc = f(c)?;
        evals += 1;
        if fc == 0.0 {
            return Ok((c, evals));
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(((a * fb - b * fa) / (fb - fa), evals))
}

/// Rotation frequency at which the right-junction current of the unit-winding
/// state vanishes (Hz), to within 10⁻⁴ f₀.
pub fn f0_numeric(sys: &GpSystem, cfg: &ScenarioConfig, opts: &RelaxOptions) -> Result<F0Result> {
    use std::f64::consts::PI;
    let f1d = f0_one_dim(&sys.consts, cfg.r0());
    let mut warm: Option<OrderParameter> = None;
    let current = |f: f64, warm: &mut Option<OrderParameter>| -> Result<f64> {
        let omega = 2.0 * PI * f;
        let s = pi_state(sys, cfg, omega, warm.as_ref(), opts, true)?;
        let i = cut_current(sys, &s.psi.psi, omega, CutSegment::Right);
        *warm = Some(s.psi);
        Ok(i)
    };
    let (root, evaluations) = illinois(
        |f| current(f, &mut warm),
        0.95 * f1d,
        1.08 * f1d,
        1e-4 * f1d,
        60,
    )?;
    Ok(F0Result {
        f0_hz: root,
        f0_one_dim_hz: f1d,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_finds_roots() {
        let (x, _) = illinois(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-12, 200).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-10);
        let (x, n) = illinois(|x| Ok((x - 0.3f64).tanh()), -5.0, 5.0, 1e-10, 200).unwrap();
        assert!((x - 0.3).abs() < 1e-9, "{x} after {n}");
    }

    #[test]
    fn illinois_rejects_bad_bracket() {
        assert!(matches!(illinois(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-6, 10), Err(Error::Bracket { .. })));
    }
}
