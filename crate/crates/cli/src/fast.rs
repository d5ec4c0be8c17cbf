//! Tabulated two-mode parameters that let the quantum and formula stages run
//! without the mean-field solver.

use std::path::Path;

use aquid_core::tmdyn::{FastModel, JunctionCurrentParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FastParams {
    pub name: String,
    pub n_atoms: u64,
    pub u_nk: f64,
    /// Bare P at f₀/2 (nK).
    pub p_half_nk: f64,
    pub u_eff_over_u: f64,
    pub p_eff_over_p_half: f64,
    pub i0_per_n: f64,
    pub alpha0: f64,
}

impl FastParams {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let p: FastParams = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if p.n_atoms == 0 || !(p.u_nk > 0.0) || !(p.u_eff_over_u > 0.0) {
            return Err(format!("{}: n_atoms, u_nk and u_eff_over_u must be positive", path.display()));
        }
        Ok(p)
    }

    pub fn junction(&self) -> JunctionCurrentParams {
        JunctionCurrentParams {
            i0_per_n: self.i0_per_n,
            alpha0: self.alpha0,
        }
    }

    pub fn u_eff(&self) -> f64 {
        self.u_nk * self.u_eff_over_u
    }

    pub fn p_eff_half(&self) -> f64 {
        self.p_half_nk * self.p_eff_over_p_half
    }

    pub fn model(&self) -> FastModel {
        FastModel::from_currents(&self.junction(), self.u_eff(), self.p_eff_half(), self.n_atoms as f64)
    }
}
