//! Time evolution on truncated Hilbert spaces.

mod coarse;
mod export;
mod generator;
mod integrate;
mod rates;
mod sparse;
mod state;

pub use coarse::{
    coarse_grain_series, coarse_grain_trajectory, compare_series, expectation_series, gaussian_kernel, same_grid,
    Metrics, ObservableSpec, Series, KERNEL_CUTOFF,
};
pub use export::{fmt_float, parse_series_csv, series_csv, write_atomic};
pub use generator::{Generator, GeneratorKind};
pub use integrate::{integrate, GuardPolicy, IntegratorSettings, TimeGrid, Trajectory, TrajectoryMeta};
pub use rates::{rate_decomposition, rate_decomposition_at, RateDecomposition, ReferenceLevel, GAP_TOL};
pub use state::{coherent_amplitudes, parse_initial_state, DensityMatrix, STATE_TOL};
