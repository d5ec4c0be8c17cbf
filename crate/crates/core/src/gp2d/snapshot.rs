//! Binary order-parameter snapshots with a JSON sidecar.
//!
//! Layout (little endian): magic `AQSN`, u32 version, u64 n, f64 L (µm),
//! f64 Ω (rad/s), f64 timestamp (simulation time, s), then n² pairs of f64
//! (re, im) in row-major order (y slowest).

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid2D;
use super::state::{OrderParameter, PhaseLabel, StationaryState};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AQSN";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub n: usize,
    pub half_length_um: f64,
    pub omega_rad_s: f64,
    pub timestamp_s: f64,
    pub mu_nk: Option<f64>,
    pub energy_nk: Option<f64>,
    pub winding: Option<i32>,
    pub phase_label: Option<PhaseLabel>,
    pub residual: Option<f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_snapshot(path: impl AsRef<Path>, op: &OrderParameter, timestamp_s: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    f.write_all(MAGIC)?;
    f.write_all(&VERSION.to_le_bytes())?;
    f.write_all(&(op.grid.n as u64).to_le_bytes())?;
    f.write_all(&op.grid.half_length.to_le_bytes())?;
    f.write_all(&op.omega.to_le_bytes())?;
    f.write_all(&timestamp_s.to_le_bytes())?;
    for v in &op.psi {
        f.write_all(&v.re.to_le_bytes())?;
        f.write_all(&v.im.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Snapshot plus sidecar carrying μ, energy and winding.
pub fn write_stationary(path: impl AsRef<Path>, state: &StationaryState) -> Result<()> {
    let path = path.as_ref();
    write_snapshot(path, &state.psi, 0.0)?;
    let side = SnapshotSidecar {
        n: state.psi.grid.n,
        half_length_um: state.psi.grid.half_length,
        omega_rad_s: state.psi.omega,
        timestamp_s: 0.0,
        mu_nk: Some(state.mu),
        energy_nk: Some(state.energy_per_particle),
        winding: Some(state.winding),
        phase_label: Some(state.phase_label),
        residual: Some(state.residual),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
    Ok(())
}

fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

/// Returns the order parameter and its timestamp.
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<(OrderParameter, f64)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path.as_ref())?);
    if &take::<4>(&mut r)? != MAGIC {
        return Err(Error::Parse("not a snapshot file".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported snapshot version {version}")));
    }
    let n = u64::from_le_bytes(take(&mut r)?) as usize;
    let half_length = f64::from_le_bytes(take(&mut r)?);
    let omega = f64::from_le_bytes(take(&mut r)?);
    let ts = f64::from_le_bytes(take(&mut r)?);
    if n % 2 == 0 || n < 3 {
        return Err(Error::Parse(format!("invalid grid size {n}")));
    }
    let mut psi = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re = f64::from_le_bytes(take(&mut r)?);
        let im = f64::from_le_bytes(take(&mut r)?);
        psi.push(Complex64::new(re, im));
    }
    Ok((
        OrderParameter {
            grid: Grid2D::new(n, half_length),
            psi,
            omega,
        },
        ts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = Grid2D::new(7, 3.0);
        let psi = (0..49).map(|i| Complex64::new(i as f64 * 0.5, -(i as f64))).collect();
        let op = OrderParameter { grid, psi, omega: 12.5 };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        write_snapshot(&p, &op, 0.25).unwrap();
        let (back, ts) = read_snapshot(&p).unwrap();
        assert_eq!(back, op);
        assert_eq!(ts, 0.25);
    }

    #[test]
    fn rejects_foreign_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        std::fs::write(&p, b"hello world, definitely not a snapshot").unwrap();
        assert!(matches!(read_snapshot(&p), Err(Error::Parse(_))));
    }
}
