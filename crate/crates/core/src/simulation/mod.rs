//! Scenario configuration, the per-step driver, Monte Carlo studies and the
//! property probes.

mod builtin;
mod config;
mod probes;
mod run;

pub use builtin::{builtin, builtin_ieee4bus, builtin_ieee4bus_iid, builtin_scalar, ieee4bus_a, BUILTIN_NAMES};
pub use config::{BaselineConfig, ScenarioConfig, WeakConfig};
pub use probes::{
    consistency_violations, covariance_consistency_probe, gain_optimality_probe, perturbation_margins,
    ConsistencyPoint, ConsistencyReport, OptimalityReport,
};
pub use run::{
    run_monte_carlo, run_scenario, run_seed, time_average, CrossPair, MseReport, RunFailure, RunRecord, Simulator,
};
