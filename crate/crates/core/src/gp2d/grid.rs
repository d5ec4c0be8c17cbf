use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::units::ScenarioConfig;

/// Square, origin-centred grid with an odd number of nodes per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub n: usize,
    pub half_length: f64,
    pub dx: f64,
    /// Node coordinates (µm); shared by both axes.
    pub axis: Vec<f64>,
}

impl Grid2D {
    pub fn new(n: usize, half_length: f64) -> Self {
        assert!(n % 2 == 1 && n >= 3, "grid needs an odd node count");
        let dx = 2.0 * half_length / (n - 1) as f64;
        let c = (n / 2) as isize;
        // exact mirror symmetry: axis[i] == -axis[n - 1 - i]
        let axis = (0..n as isize).map(|i| (i - c) as f64 * dx).collect();
        Grid2D {
            n,
            half_length,
            dx,
            axis,
        }
    }

    pub fn for_config(cfg: &ScenarioConfig) -> Self {
        Self::new(cfg.numerics.grid_points_per_axis, cfg.numerics.box_half_length_um)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    /// Flat index of node (ix, iy); storage is row-major in y.
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        self.axis[ix]
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        self.axis[iy]
    }

    /// Index of the row/column through the origin.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Angular wavenumbers in FFT order (µm⁻¹).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        let period = n as f64 * self.dx;
        (0..n)
            .map(|m| {
                let m = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                2.0 * std::f64::consts::PI * m / period
            })
            .collect()
    }

    /// Bilinear interpolation of a field at (x, y); zero outside the box.
    pub fn interpolate(&self, f: &[Complex64], x: f64, y: f64) -> Complex64 {
        let n = self.n;
        let fx = (x + self.half_length) / self.dx;
        let fy = (y + self.half_length) / self.dx;
        if fx < 0.0 || fy < 0.0 || fx > (n - 1) as f64 || fy > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let ix = (fx.floor() as usize).min(n - 2);
        let iy = (fy.floor() as usize).min(n - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let f00 = f[self.idx(ix, iy)];
        let f10 = f[self.idx(ix + 1, iy)];
        let f01 = f[self.idx(ix, iy + 1)];
        let f11 = f[self.idx(ix + 1, iy + 1)];
        f00 * ((1.0 - tx) * (1.0 - ty)) + f10 * (tx * (1.0 - ty)) + f01 * ((1.0 - tx) * ty) + f11 * (tx * ty)
    }
}

/// ∬ a* b dx dy.
pub fn inner(grid: &Grid2D, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let s: Complex64 = a.iter().zip(b).map(|(u, v)| u.conj() * v).sum();
    s * grid.cell_area()
}

/// ∬ |a|² dx dy.
pub fn norm2(grid: &Grid2D, a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_area()
}

pub fn normalize(grid: &Grid2D, a: &mut [Complex64]) {
    let s = norm2(grid, a).sqrt();
    if s > 0.0 {
        let inv = 1.0 / s;
        a.iter_mut().for_each(|v| *v *= inv);
    }
}

/// Image under the half-turn (x, y) → (−x, −y): reverses the flat storage.
pub fn half_turn(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().rev().copied().collect()
}

/// Sign of the half-turn parity: +1 if ⟨a, C₂a⟩ ≥ 0.
pub fn half_turn_parity(a: &[Complex64]) -> i32 {
    let s: Complex64 = a.iter().zip(a.iter().rev()).map(|(u, v)| u.conj() * v).sum();
    if s.re >= 0.0 {
        1
    } else {
        -1
    }
}

/// Replace `a` with its component of the given half-turn parity.
pub fn project_half_turn(a: &mut [Complex64], parity: i32) {
    let len = a.len();
    let sign = if parity >= 0 { 1.0 } else { -1.0 };
    for i in 0..len / 2 {
        let j = len - 1 - i;
        let (u, v) = (a[i], a[j]);
        a[i] = (u + v * sign) * 0.5;
        a[j] = (v + u * sign) * 0.5;
    }
    if len % 2 == 1 && sign < 0.0 {
        a[len / 2] = Complex64::new(0.0, 0.0);
    }
}

/// Image under the antiunitary y-mirror Ψ(x, y) → Ψ*(x, −y).
pub fn mirror_y_conj(grid: &Grid2D, a: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n;
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    for iy in 0..n {
        let src = &a[(n - 1 - iy) * n..(n - iy) * n];
        out[iy * n..(iy + 1) * n]
            .iter_mut()
            .zip(src)
            .for_each(|(o, s)| *o = s.conj());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_mirror_symmetric() {
        let g = Grid2D::new(9, 4.0);
        assert_eq!(g.dx, 1.0);
        for i in 0..g.n {
            assert_eq!(g.axis[i], -g.axis[g.n - 1 - i]);
        }
        assert_eq!(g.axis[g.center()], 0.0);
        let k = g.wavenumbers();
        for m in 1..=g.n / 2 {
            assert_eq!(k[m], -k[g.n - m]);
        }
    }

    #[test]
    fn half_turn_projection() {
        let g = Grid2D::new(5, 2.0);
        let a: Vec<Complex64> = (0..g.len()).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut even = a.clone();
        project_half_turn(&mut even, 1);
        let mut odd = a.clone();
        project_half_turn(&mut odd, -1);
        for i in 0..a.len() {
            assert!((even[i] + odd[i] - a[i]).norm() < 1e-12);
        }
        assert!(inner(&g, &even, &odd).norm() < 1e-12);
        assert_eq!(half_turn_parity(&even), 1);
        assert_eq!(half_turn_parity(&odd), -1);
    }
}
