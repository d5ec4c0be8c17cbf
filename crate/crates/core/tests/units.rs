use std::f64::consts::PI;

use aquid_core::units::*;
use serde_json::Value;

const GOLDEN: &str = include_str!("../../../oracles/units_golden.json");

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn constants_match_oracle() {
    let g: Value = serde_json::from_str(GOLDEN).unwrap();
    let c = constants();
    let want = |k: &str| g[k].as_f64().unwrap();
    assert!(rel(c.hbar_over_kb, want("hbar_over_kb")) < 1e-12);
    assert!(rel(c.hbar2_over_2mkb, want("hbar2_over_2mkb")) < 1e-12);
    assert!(rel(c.hbar_over_m, want("hbar_over_m")) < 1e-12);
    assert!(rel(c.scattering_length_a, want("scattering_length_um")) < 1e-12);
    assert!(rel(coupling_2d(&c, 2.0 * PI * 297.0).g2d, want("g2d_297hz")) < 1e-12);
    for (r0, v) in g["f0_one_dim"].as_object().unwrap() {
        let r0: f64 = r0.parse().unwrap();
        assert!(rel(f0_one_dim(&c, r0), v.as_f64().unwrap()) < 1e-12);
    }
}

#[test]
fn bundled_scenarios_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for (name, r0, n) in [("r385", 3.85, 3000.0), ("r482", 4.82, 2700.0), ("r800_n4500", 8.0, 4500.0), ("r800_n4000", 8.0, 4000.0)] {
        let cfg = load_scenario_file(dir.join(format!("{name}.toml"))).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.name, name);
        assert_eq!(cfg.r0(), r0);
        assert_eq!(cfg.n(), n);
        assert_eq!(cfg.numerics.grid_points_per_axis, 257);
        assert_eq!(cfg.with_grid(129).numerics.grid_points_per_axis, 129);
    }
}

#[test]
fn scenario_round_trips_through_toml() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let cfg = load_scenario_file(dir.join("r482.toml")).unwrap();
    let back = load_scenario(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
}
