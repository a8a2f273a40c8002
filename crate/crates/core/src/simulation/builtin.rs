use std::collections::BTreeMap;

use crate::attack::AttackSpec;
use crate::linalg::{Mat, Vector};
use crate::model::{Defense, SensorSpec, SystemModel};

use super::config::{BaselineConfig, ScenarioConfig, WeakConfig};

/// Discretized closed-loop dynamics of the 4-bus distribution line.
pub fn ieee4bus_a() -> Mat {
    #[rustfmt::skip]
    let a = Mat::from_row_slice(4, 4, &[
        -0.837,  0.5427, 0.0,    0.0,
        -0.5427, -0.837, 0.0,    0.0,
         0.0,    0.0,    0.9851, 0.0,
         0.0,    0.0,    0.0,    0.9556,
    ]);
    a
}

fn row(v: [f64; 4]) -> Mat {
    Mat::from_row_slice(1, 4, &v)
}

/// Five scalar sensors, 1 and 2 weak, attacked by Gaussian noise of variance 5
/// and a unit-step pulse of height 3 at `k = 50`.
pub fn builtin_ieee4bus() -> ScenarioConfig {
    let system = SystemModel::new(ieee4bus_a(), Mat::from_diagonal(&Vector::from_vec(vec![0.1, 0.2, 0.3, 0.2])))
        .expect("built-in system is valid");
    let rows = [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0], [0.0, 1.0, 1.0, 0.0]];
    let sensors = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let defense = if i < 2 { Defense::Weak } else { Defense::Strong };
            SensorSpec::new(i + 1, row(*r), Mat::from_element(1, 1, 0.1), defense).expect("built-in sensor is valid")
        })
        .collect();
    let weak = BTreeMap::from([
        (1, WeakConfig { strong_ids: Some(vec![3, 4]), ..WeakConfig::default() }),
        (2, WeakConfig { strong_ids: Some(vec![3, 5]), ..WeakConfig::default() }),
    ]);
    let attacks = vec![
        AttackSpec::gaussian(1, Mat::from_element(1, 1, 5.0)).expect("valid covariance"),
        AttackSpec::pulse(2, 50, 51, Vector::from_element(1, 3.0)).expect("valid pulse"),
    ];
    ScenarioConfig {
        name: "ieee4bus".into(),
        system,
        x0_mean: Vector::zeros(4),
        x0_cov: Mat::identity(4, 4),
        sensors,
        weak,
        attacks,
        cross_init: BTreeMap::new(),
        baseline: BaselineConfig::default(),
        horizon: 100,
        runs: 500,
        seed: 0,
        threads: None,
    }
}

/// The 4-bus scenario with disjoint strong assignments (1 → {3, 4}, 2 → {5})
/// and white Gaussian attacks of covariance `η_i I`, the setting in which the
/// local covariance recursion is exact.
pub fn builtin_ieee4bus_iid() -> ScenarioConfig {
    let mut cfg = builtin_ieee4bus();
    cfg.name = "ieee4bus-iid".into();
    cfg.weak.get_mut(&2).expect("sensor 2 is weak").strong_ids = Some(vec![5]);
    cfg.attacks = cfg
        .weak_ids()
        .into_iter()
        .map(|i| AttackSpec::gaussian(i, Mat::identity(1, 1) * cfg.weak_config(i).eta).expect("valid covariance"))
        .collect();
    cfg
}

/// One-dimensional scenario: `A = Q = 1`, one weak and one strong sensor
/// measuring the state directly with unit noise.
pub fn builtin_scalar() -> ScenarioConfig {
    let one = || Mat::from_element(1, 1, 1.0);
    let system = SystemModel::new(one(), one()).expect("valid");
    let sensors = vec![
        SensorSpec::new(1, one(), one(), Defense::Weak).expect("valid"),
        SensorSpec::new(2, one(), one(), Defense::Strong).expect("valid"),
    ];
    ScenarioConfig {
        name: "scalar".into(),
        system,
        x0_mean: Vector::zeros(1),
        x0_cov: one(),
        sensors,
        weak: BTreeMap::from([(1, WeakConfig::default())]),
        attacks: vec![AttackSpec::gaussian(1, one()).expect("valid")],
        cross_init: BTreeMap::new(),
        baseline: BaselineConfig::default(),
        horizon: 100,
        runs: 500,
        seed: 0,
        threads: None,
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["ieee4bus", "ieee4bus-iid", "scalar"];

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    match name {
        "ieee4bus" => Some(builtin_ieee4bus()),
        "ieee4bus-iid" => Some(builtin_ieee4bus_iid()),
        "scalar" => Some(builtin_scalar()),
        _ => None,
    }
}
