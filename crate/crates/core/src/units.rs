//! Physical constants, the nK/µm/s unit system and scenario configuration.
//!
//! Energies are stored as E/k_B in nK, lengths in µm, times in s and
//! frequencies in Hz. ħ only enters through ħ/k_B (nK·s) and ħ/m (µm²/s).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HBAR_SI: f64 = 1.054_571_817e-34;
const KB_SI: f64 = 1.380_649e-23;
const AMU_SI: f64 = 1.660_539_066_60e-27;
const BOHR_SI: f64 = 5.291_772_109_03e-11;
/// ⁸⁷Rb mass in atomic mass units.
pub const RB87_MASS_U: f64 = 86.909;
/// s-wave scattering length of ⁸⁷Rb in Bohr radii.
pub const RB87_SCATTERING_BOHR: f64 = 98.98;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysConsts {
    /// ħ/k_B in nK·s.
    pub hbar_over_kb: f64,
    /// ħ²/(2 m k_B) in nK·µm².
    pub hbar2_over_2mkb: f64,
    /// ħ/m in µm²/s, used for velocities and currents.
    pub hbar_over_m: f64,
    /// Scattering length in µm.
    pub scattering_length_a: f64,
    /// Bohr radius in µm.
    pub bohr_radius: f64,
    /// Atomic mass in kg.
    pub mass_m: f64,
}

pub fn constants() -> PhysConsts {
    let mass = RB87_MASS_U * AMU_SI;
    let bohr_um = BOHR_SI * 1e6;
    PhysConsts {
        hbar_over_kb: HBAR_SI / KB_SI * 1e9,
        hbar2_over_2mkb: HBAR_SI * HBAR_SI / (2.0 * mass * KB_SI) * 1e12 * 1e9,
        hbar_over_m: HBAR_SI / mass * 1e12,
        scattering_length_a: RB87_SCATTERING_BOHR * bohr_um,
        bohr_radius: bohr_um,
        mass_m: mass,
    }
}

/// Effective 2D coupling in nK·µm² (multiplies N|Ψ|² in the mean-field term).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoupling {
    pub g2d: f64,
}

/// g = g₃D (mω_z / 2πħ)^½ with g₃D = 4πħ²a/m.
pub fn coupling_2d(consts: &PhysConsts, omega_z: f64) -> EffectiveCoupling {
    // mω_z/(2πħ) = ω_z / (2π ħ/m), in µm⁻²
    let axial = (omega_z / (2.0 * PI * consts.hbar_over_m)).sqrt();
    let g3d = 4.0 * PI * (2.0 * consts.hbar2_over_2mkb) * consts.scattering_length_a;
    EffectiveCoupling { g2d: g3d * axial }
}

/// One-dimensional ring period ħ/(2π m r₀²) in Hz.
pub fn f0_one_dim(consts: &PhysConsts, r0: f64) -> f64 {
    consts.hbar_over_m / (2.0 * PI * r0 * r0)
}

/// Trap, barrier and condensate parameters plus numerical controls for one
/// condensate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub trap: TrapSection,
    pub barrier: BarrierSection,
    pub condensate: CondensateSection,
    pub numerics: NumericsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    /// Ring depth V0 (nK).
    pub v0_nk: f64,
    /// Ring radius r0 (µm).
    pub r0_um: f64,
    /// 1/e² ring width w (µm).
    pub w_um: f64,
    /// Vertical trap frequency ω_z (rad/s).
    pub omega_z_rad_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierSection {
    /// Barrier height Vb (nK).
    pub vb_nk: f64,
    /// Barrier 1/e width λ_b (µm).
    pub lambda_b_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondensateSection {
    pub n_atoms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub grid_points_per_axis: usize,
    /// Half side of the square box (µm).
    pub box_half_length_um: f64,
    /// Imaginary-time step (s).
    pub dt_imag_s: f64,
    /// Real-time step (s).
    pub dt_real_s: f64,
    /// Relative residual ‖(H − μ)Ψ‖/|μ| accepted for stationary states.
    pub convergence_tol: f64,
}

impl ScenarioConfig {
    pub fn v0(&self) -> f64 {
        self.trap.v0_nk
    }
    pub fn r0(&self) -> f64 {
        self.trap.r0_um
    }
    pub fn w(&self) -> f64 {
        self.trap.w_um
    }
    pub fn vb(&self) -> f64 {
        self.barrier.vb_nk
    }
    pub fn lambda_b(&self) -> f64 {
        self.barrier.lambda_b_um
    }
    pub fn omega_z(&self) -> f64 {
        self.trap.omega_z_rad_s
    }
    pub fn n(&self) -> f64 {
        self.condensate.n_atoms as f64
    }

    /// Default box half-length r0 + 4w.
    pub fn default_box_half_length(r0: f64, w: f64) -> f64 {
        r0 + 4.0 * w
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, bound: String| Err(Error::Invariant { field, bound });
        let finite_pos = [
            ("trap.v0_nk", self.trap.v0_nk),
            ("trap.r0_um", self.trap.r0_um),
            ("trap.w_um", self.trap.w_um),
            ("trap.omega_z_rad_s", self.trap.omega_z_rad_s),
            ("barrier.vb_nk", self.barrier.vb_nk),
            ("barrier.lambda_b_um", self.barrier.lambda_b_um),
            ("numerics.box_half_length_um", self.numerics.box_half_length_um),
            ("numerics.dt_imag_s", self.numerics.dt_imag_s),
            ("numerics.dt_real_s", self.numerics.dt_real_s),
            ("numerics.convergence_tol", self.numerics.convergence_tol),
        ];
        for (field, v) in finite_pos {
            if !(v.is_finite() && v > 0.0) {
                return bad(field, format!("must be finite and > 0 (got {v})"));
            }
        }
        if self.barrier.vb_nk >= self.trap.v0_nk {
            return bad(
                "barrier.vb_nk",
                format!(
                    "must lie below the ring depth v0_nk = {} (got {})",
                    self.trap.v0_nk, self.barrier.vb_nk
                ),
            );
        }
        if self.trap.w_um >= self.trap.r0_um {
            return bad(
                "trap.w_um",
                format!("must be smaller than r0_um = {} (got {})", self.trap.r0_um, self.trap.w_um),
            );
        }
        let n = self.condensate.n_atoms;
        if n < 2 || n % 2 != 0 {
            return bad("condensate.n_atoms", format!("must be even and >= 2 (got {n})"));
        }
        let g = self.numerics.grid_points_per_axis;
        if g < 9 || g % 2 == 0 {
            return bad(
                "numerics.grid_points_per_axis",
                format!("must be odd and >= 9 so the origin is a grid node (got {g})"),
            );
        }
        if self.numerics.box_half_length_um <= self.trap.r0_um + self.trap.w_um {
            return bad(
                "numerics.box_half_length_um",
                format!(
                    "must exceed r0 + w = {} (got {})",
                    self.trap.r0_um + self.trap.w_um,
                    self.numerics.box_half_length_um
                ),
            );
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Same scenario on a different grid (keeps the box).
    pub fn with_grid(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.numerics.grid_points_per_axis = n;
        c
    }
}

/// Parse and validate a TOML scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario_file(path: impl AsRef<std::path::Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    load_scenario(&text)
}
