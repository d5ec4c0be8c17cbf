//! Ring-condensate interferometer models: a 2D rotating-frame mean-field
//! solver, two-mode parameter extraction, semiclassical two-mode dynamics and
//! the quantum phase spectrum of the two-mode Hamiltonian.

pub mod error;
pub mod gbh;
pub mod gp2d;
pub mod qspec;
pub mod tmdyn;
pub mod units;

pub use error::{Error, Result};
pub use units::{constants, coupling_2d, f0_one_dim, load_scenario, load_scenario_file, PhysConsts, ScenarioConfig};
