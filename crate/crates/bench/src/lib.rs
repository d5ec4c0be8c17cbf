//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use aquid_core::{load_scenario_file, ScenarioConfig};

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Bundled scenario on an `n`-point grid.
pub fn scenario(name: &str, n: usize) -> ScenarioConfig {
    load_scenario_file(scenario_dir().join(format!("{name}.toml")))
        .expect("bundled scenario parses")
        .with_grid(n)
}
