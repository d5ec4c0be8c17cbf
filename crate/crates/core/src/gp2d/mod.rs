//! Rotating-frame mean-field solver on a square grid: stationary states by
//! imaginary-time relaxation, real-time split-step propagation and the
//! order-parameter observables used downstream.

mod evolve;
mod f0;
mod grid;
mod period;
mod relax;
mod snapshot;
mod state;
mod system;

pub use evolve::{
    cut_current, evolve_real, tm_time_series, write_time_series, CutSegment, EvolveOptions, TimeSample,
    TIME_SERIES_HEADER,
};
pub use f0::{f0_numeric, illinois, F0Result};
pub use grid::{half_turn, half_turn_parity, inner, mirror_y_conj, norm2, normalize, project_half_turn, Grid2D};
pub use period::{cycles_completed, period_estimate};
pub use relax::{fix_phase_convention, pi_state, relax_imaginary, zero_state, RelaxOptions, Sector, PHASE_LABEL_TOL};
pub use snapshot::{read_snapshot, sidecar_path, write_snapshot, write_stationary, SnapshotSidecar};
pub use state::{
    make_initial, phase_difference, pointwise_phase, tm_projection, two_mode_state, winding_number, winding_seed,
    wrap_phase, InitialKind, LocalizedModes, OrderParameter, PhaseLabel, StationaryState, TmProjection,
};
pub use system::{potential, Energetics, GpSystem, SplitStep, TimeKind};
