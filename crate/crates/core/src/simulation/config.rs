use std::collections::{BTreeMap, BTreeSet};

use crate::attack::{AttackKind, AttackSpec};
use crate::cross::CrossInit;
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::local::LocalInit;
use crate::model::{Defense, SensorSpec, SystemModel};

/// Estimator settings for one weak-defense sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakConfig {
    /// Strong partners in stacking order; `None` means every strong sensor.
    pub strong_ids: Option<Vec<usize>>,
    pub eta: f64,
    /// Per-step compensation factor; the last entry holds past the end.
    pub eta_schedule: Option<Vec<f64>>,
    pub init: LocalInit,
}

impl Default for WeakConfig {
    fn default() -> Self {
        Self { strong_ids: None, eta: 1.0, eta_schedule: None, init: LocalInit::default() }
    }
}

impl WeakConfig {
    pub fn eta_at(&self, k: usize) -> f64 {
        match &self.eta_schedule {
            Some(s) if !s.is_empty() => s[k.min(s.len() - 1)],
            _ => self.eta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub q_theta: f64,
    /// Initial covariance; defaults to the proposed estimator's `P^X(0)`.
    pub p0: Option<Mat>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { q_theta: 1.0, p0: None }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub system: SystemModel,
    pub x0_mean: Vector,
    pub x0_cov: Mat,
    /// All sensors, weak and strong.
    pub sensors: Vec<SensorSpec>,
    /// Per weak sensor settings; weak sensors missing here get defaults.
    pub weak: BTreeMap<usize, WeakConfig>,
    pub attacks: Vec<AttackSpec>,
    /// Initial cross matrices keyed by `(i, j)` with `i < j`.
    pub cross_init: BTreeMap<(usize, usize), CrossInit>,
    pub baseline: BaselineConfig,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    /// Worker threads for Monte Carlo; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ScenarioConfig {
    pub fn sensor(&self, id: usize) -> Option<&SensorSpec> {
        self.sensors.iter().find(|s| s.id == id)
    }

    /// Weak sensor ids in increasing order.
    pub fn weak_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.sensors.iter().filter(|s| s.defense == Defense::Weak).map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn strong_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> =
            self.sensors.iter().filter(|s| s.defense == Defense::Strong).map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn weak_config(&self, id: usize) -> WeakConfig {
        self.weak.get(&id).cloned().unwrap_or_default()
    }

    /// Effective strong partners of a weak sensor.
    pub fn strong_assignment(&self, weak_id: usize) -> Vec<usize> {
        self.weak.get(&weak_id).and_then(|w| w.strong_ids.clone()).unwrap_or_else(|| self.strong_ids())
    }

    pub fn attack(&self, weak_id: usize) -> Option<&AttackSpec> {
        self.attacks.iter().find(|a| a.sensor_id == weak_id)
    }

    /// Effective `η_i` at step 1, in weak-id order.
    pub fn etas(&self) -> Vec<f64> {
        self.weak_ids().iter().map(|&i| self.weak_config(i).eta_at(1)).collect()
    }

    /// Sets a constant compensation factor for a weak sensor.
    pub fn set_eta(&mut self, weak_id: usize, eta: f64) -> Result<()> {
        if !self.weak_ids().contains(&weak_id) {
            return Err(Error::Config(format!("eta given for sensor {weak_id}, which is not a weak-defense sensor")));
        }
        let w = self.weak.entry(weak_id).or_default();
        w.eta = eta;
        w.eta_schedule = None;
        Ok(())
    }

    /// True when no strong sensor is shared between two weak sensors.
    pub fn assignments_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.weak_ids().iter().flat_map(|&i| self.strong_assignment(i)).all(|s| seen.insert(s))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.system.n();
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if !self.system.a_seq().covers(self.horizon) {
            return Err(Error::Config(format!("A sequence is shorter than horizon {}", self.horizon)));
        }
        if self.x0_mean.len() != n {
            return Err(Error::dim("x0 mean", (n, 1), (self.x0_mean.len(), 1)));
        }
        if self.x0_cov.shape() != (n, n) {
            return Err(Error::dim("x0 covariance", (n, n), self.x0_cov.shape()));
        }

        let mut ids = BTreeSet::new();
        for s in &self.sensors {
            if !ids.insert(s.id) {
                return Err(Error::Config(format!("duplicate sensor id {}", s.id)));
            }
            if s.n() != n {
                return Err(Error::dim(format!("C of sensor {}", s.id), (s.p(), n), (s.p(), s.n())));
            }
            if !s.c_seq().covers(self.horizon) {
                return Err(Error::Config(format!("C sequence of sensor {} is shorter than horizon {}", s.id, self.horizon)));
            }
        }
        let weak = self.weak_ids();
        if weak.is_empty() {
            return Err(Error::Config("at least one weak-defense sensor is required".into()));
        }
        for id in self.weak.keys() {
            match self.sensor(*id) {
                None => return Err(Error::Config(format!("estimator settings for unknown sensor id {id}"))),
                Some(s) if s.defense != Defense::Weak => {
                    return Err(Error::Config(format!("estimator settings given for strong-defense sensor {id}")))
                }
                _ => {}
            }
        }
        for &i in &weak {
            let w = self.weak_config(i);
            for s in self.strong_assignment(i) {
                match self.sensor(s) {
                    None => {
                        return Err(Error::Config(format!("weak sensor {i} references unknown strong sensor id {s}")))
                    }
                    Some(spec) if spec.defense != Defense::Strong => {
                        return Err(Error::Config(format!(
                            "weak sensor {i} references sensor {s}, which is not strong-defense"
                        )))
                    }
                    _ => {}
                }
            }
            let etas = std::iter::once(w.eta).chain(w.eta_schedule.iter().flatten().copied());
            for e in etas {
                if !(e >= 0.0 && e.is_finite()) {
                    return Err(Error::Config(format!("sensor {i}: eta must be finite and >= 0, got {e}")));
                }
            }
        }
        let mut attacked = BTreeSet::new();
        for a in &self.attacks {
            let spec = self
                .sensor(a.sensor_id)
                .ok_or_else(|| Error::Config(format!("attack on unknown sensor id {}", a.sensor_id)))?;
            if spec.defense != Defense::Weak {
                return Err(Error::Config(format!("attack on strong-defense sensor {}", a.sensor_id)));
            }
            if !attacked.insert(a.sensor_id) {
                return Err(Error::Config(format!("more than one attack on sensor {}", a.sensor_id)));
            }
            if let Some(d) = a.dim() {
                if d != spec.p() {
                    return Err(Error::dim(format!("attack on sensor {}", a.sensor_id), (spec.p(), 1), (d, 1)));
                }
            }
            if let AttackKind::File { path, trace } = &a.kind {
                if trace.steps.len() <= self.horizon {
                    return Err(Error::Config(format!(
                        "attack trace {} has {} steps, horizon {} needs {}",
                        path.display(),
                        trace.steps.len(),
                        self.horizon,
                        self.horizon + 1
                    )));
                }
            }
        }
        for &(i, j) in self.cross_init.keys() {
            if i >= j || !weak.contains(&i) || !weak.contains(&j) {
                return Err(Error::Config(format!("cross initial values for ({i}, {j}) need two weak sensors with i < j")));
            }
        }
        if self.baseline.q_theta < 0.0 || !self.baseline.q_theta.is_finite() {
            return Err(Error::Config(format!("q_theta must be finite and >= 0, got {}", self.baseline.q_theta)));
        }
        Ok(())
    }
}
