//! End-to-end scenarios and the batch studies built on them: resolution
//! versus channel count and Monte Carlo delay error.

mod monte_carlo;
mod scenario;
mod sweep;

pub use monte_carlo::{monte_carlo_error, ErrorCurvePoint, McSettings};
pub use scenario::{
    derive_seed, detect, resolvability, run_scenario, simulate_quotient, DetectorParams,
    ScenarioConfig,
};
pub use sweep::{resolution_sweep, ResolutionRow, SweepCell, SweepReport};
