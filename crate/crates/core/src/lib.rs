//! Secure multi-sensor fusion estimation under false-data-injection attacks.
//!
//! Each weak-defense sensor is stacked with trusted sensors and runs a local
//! estimator of the state and its own attack signal. Local estimates are fused
//! with matrix weights built from the local and cross error covariances.

pub mod attack;
pub mod baseline;
pub mod cross;
pub mod error;
pub mod fusion;
pub mod linalg;
pub mod local;
pub mod model;
pub mod simulation;

pub use attack::{AttackKind, AttackSpec, AttackTrace};
pub use baseline::{akf_step, AkfState};
pub use cross::{CrossInit, CrossState};
pub use error::{Error, Result};
pub use fusion::{FusedEstimate, FusionWeights};
pub use linalg::{Mat, Vector};
pub use local::{GainPair, LocalEstimatorState, LocalInit, XiTriple};
pub use model::{
    AugmentedSubsystem, Defense, EnhancedSensor, MatrixSeq, ObservabilityReport, SensorSpec, SystemModel,
};
pub use simulation::{
    builtin, builtin_ieee4bus, run_monte_carlo, run_scenario, BaselineConfig, MseReport, RunRecord, ScenarioConfig,
    WeakConfig,
};
