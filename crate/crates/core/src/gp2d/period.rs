use crate::error::{Error, Result};

/// Interpolated times of mean crossings, split by direction. A crossing only
/// counts once the signal has left the band ±h around `level` on both sides,
/// so noise near the mean cannot register extra crossings.
fn crossings(t: &[f64], v: &[f64], level: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut ups = Vec::new();
    let mut downs = Vec::new();
    // +1 after being above level+h, -1 after being below level-h
    let mut state = 0i8;
    let mut last_up = None;
    let mut last_down = None;
    for i in 1..v.len() {
        let (a, b) = (v[i - 1] - level, v[i] - level);
        if a < 0.0 && b >= 0.0 {
            last_up = Some(t[i - 1] + (t[i] - t[i - 1]) * (-a) / (b - a));
        } else if a >= 0.0 && b < 0.0 {
            last_down = Some(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
        if b > h && state != 1 {
            if state == -1 {
                if let Some(tc) = last_up {
                    ups.push(tc);
                }
            }
            state = 1;
        } else if b < -h && state != -1 {
            if state == 1 {
                if let Some(tc) = last_down {
                    downs.push(tc);
                }
            }
            state = -1;
        }
    }
    (ups, downs)
}

fn mean_spacing(c: &[f64]) -> Option<(f64, usize)> {
    (c.len() >= 2).then(|| ((c[c.len() - 1] - c[0]) / (c.len() - 1) as f64, c.len() - 1))
}

/// Oscillation period from the mean spacing of same-direction mean
/// crossings, with linear interpolation between samples.
///
/// The reference level is first the sample mean, then the mean over a whole
/// number of periods; the hysteresis band is a quarter of the half range.
pub fn period_estimate(t: &[f64], v: &[f64]) -> Result<f64> {
    assert_eq!(t.len(), v.len());
    if v.len() < 3 {
        return Err(Error::TooFewCrossings(0));
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let h = 0.25 * 0.5 * (hi - lo);
    if !(h > 0.0) {
        return Err(Error::TooFewCrossings(0));
    }
    let mut level = v.iter().sum::<f64>() / v.len() as f64;
    let mut result = None;
    for _ in 0..2 {
        let (ups, downs) = crossings(t, v, level, h);
        let total = ups.len() + downs.len();
        if total < 3 {
            return Err(Error::TooFewCrossings(total));
        }
        let est = match (mean_spacing(&ups), mean_spacing(&downs)) {
            (Some((pu, nu)), Some((pd, nd))) => (pu * nu as f64 + pd * nd as f64) / (nu + nd) as f64,
            (Some((p, _)), None) | (None, Some((p, _))) => p,
            (None, None) => return Err(Error::TooFewCrossings(total)),
        };
        result = Some(est);
        // refine the level over whole periods
        let span = if ups.len() >= 2 { &ups } else { &downs };
        let (a, b) = (span[0], span[span.len() - 1]);
        let (mut s, mut w) = (0.0, 0.0);
        for i in 1..t.len() {
            let (ta, tb) = (t[i - 1].max(a), t[i].min(b));
            if tb > ta {
                s += 0.5 * (v[i - 1] + v[i]) * (tb - ta);
                w += tb - ta;
            }
        }
        if w > 0.0 {
            level = s / w;
        }
    }
    Ok(result.expect("loop runs at least once"))
}

/// Whole periods resolved so far (same-direction crossing spacings about
/// the sample mean); used to end runs early.
pub fn cycles_completed(t: &[f64], v: &[f64]) -> usize {
    if v.len() < 3 {
        return 0;
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let h = 0.25 * 0.5 * (hi - lo);
    if !(h > 0.0) {
        return 0;
    }
    let level = v.iter().sum::<f64>() / v.len() as f64;
    let (ups, downs) = crossings(t, v, level, h);
    ups.len().max(downs.len()).saturating_sub(1)
}
