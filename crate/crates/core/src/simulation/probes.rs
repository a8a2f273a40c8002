use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::attack::AttackKind;
use crate::error::{Error, Result};
use crate::linalg::{frobenius, Mat, Vector};
use crate::local::{compute_gains, compute_xi, phi_covariance, state_covariance_expanded, GainPair, XiTriple};
use crate::model::AugmentedSubsystem;

use super::config::ScenarioConfig;
use super::run::{run_seed, with_pool, Simulator};

/// Increase of `trace P^X` and `trace P^φ` when the optimal gains are moved
/// by `a_r` and `b_r`.
pub fn perturbation_margins(xi: &XiTriple, gains: &GainPair, aug: &AugmentedSubsystem, a_r: &Mat, b_r: &Mat) -> (f64, f64) {
    let base_x = state_covariance_expanded(xi, &gains.k, aug).trace();
    let base_phi = phi_covariance(xi, &gains.gamma, aug).trace();
    let x = state_covariance_expanded(xi, &(&gains.k + a_r), aug).trace();
    let phi = phi_covariance(xi, &(&gains.gamma + b_r), aug).trace();
    (x - base_x, phi - base_phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub step: usize,
    pub trials: usize,
    /// Smallest state-gain margin per weak sensor.
    pub min_margin_x: Vec<f64>,
    /// Smallest input-gain margin per weak sensor.
    pub min_margin_phi: Vec<f64>,
    pub weak_ids: Vec<usize>,
}

impl OptimalityReport {
    pub const TOLERANCE: f64 = -1e-9;

    pub fn min_margin(&self) -> f64 {
        self.min_margin_x.iter().chain(&self.min_margin_phi).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.min_margin() >= Self::TOLERANCE
    }
}

fn random_nonzero<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    loop {
        let scale = 10f64.powf(rng.random_range(-3.0..0.0));
        let m = Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
        if m.amax() > 0.0 {
            return m;
        }
    }
}

/// Evaluates random gain perturbations at step `step` of the realization
/// with seed `seed`. The covariance recursions do not depend on the data, so
/// the seed only affects the trial draws.
pub fn gain_optimality_probe(cfg: &ScenarioConfig, step: usize, trials: usize, seed: u64) -> Result<OptimalityReport> {
    if step < 1 || trials < 1 {
        return Err(Error::Config("optimality probe needs step >= 1 and trials >= 1".into()));
    }
    if step > cfg.horizon {
        return Err(Error::Config(format!("probe step {step} exceeds horizon {}", cfg.horizon)));
    }
    let mut sim = Simulator::new(cfg, seed)?;
    for _ in 1..step {
        sim.step()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let pending = sim.pending_locals();
    let mut min_x = Vec::new();
    let mut min_phi = Vec::new();
    for (idx, state) in pending.iter().enumerate() {
        let aug = sim.augmented(idx, step)?;
        let xi = compute_xi(state, &aug);
        let gains = compute_gains(state, &xi, &aug).map_err(|e| e.at_step(step))?;
        let (mut mx, mut mp) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..trials {
            let a_r = random_nonzero(gains.k.nrows(), gains.k.ncols(), &mut rng);
            let b_r = random_nonzero(gains.gamma.nrows(), gains.gamma.ncols(), &mut rng);
            let (x, p) = perturbation_margins(&xi, &gains, &aug, &a_r, &b_r);
            mx = mx.min(x);
            mp = mp.min(p);
        }
        min_x.push(mx);
        min_phi.push(mp);
    }
    Ok(OptimalityReport {
        step,
        trials,
        min_margin_x: min_x,
        min_margin_phi: min_phi,
        weak_ids: sim.weak_ids().to_vec(),
    })
}

/// Empirical against predicted error covariance of one local estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyPoint {
    pub step: usize,
    pub sensor: usize,
    pub predicted: Mat,
    pub empirical: Mat,
}

impl ConsistencyPoint {
    pub fn frobenius_error(&self) -> f64 {
        frobenius(&(&self.empirical - &self.predicted)) / frobenius(&self.predicted)
    }

    pub fn trace_error(&self) -> f64 {
        (self.empirical.trace() - self.predicted.trace()).abs() / self.predicted.trace().abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub runs: usize,
    pub points: Vec<ConsistencyPoint>,
    /// Reasons the recursion is not expected to be exact for this config.
    pub violations: Vec<String>,
}

impl ConsistencyReport {
    pub fn max_frobenius_error(&self) -> f64 {
        self.points.iter().map(|p| p.frobenius_error()).fold(0.0, f64::max)
    }

    pub fn max_trace_error(&self) -> f64 {
        self.points.iter().map(|p| p.trace_error()).fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.violations.is_empty() && self.max_frobenius_error() < tol
    }
}

/// Conditions under which the local covariance recursion is exact.
pub fn consistency_violations(cfg: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    if !cfg.assignments_disjoint() {
        out.push("strong-defense assignments overlap".to_string());
    }
    for id in cfg.weak_ids() {
        let w = cfg.weak_config(id);
        if w.eta_schedule.is_some() {
            out.push(format!("sensor {id}: time-varying eta"));
        }
        let p = cfg.sensor(id).map(|s| s.p()).unwrap_or(0);
        let expected = Mat::identity(p, p) * w.eta;
        let ok = match cfg.attack(id).map(|a| &a.kind) {
            Some(AttackKind::Gaussian { cov, .. }) => (cov - &expected).amax() <= 1e-12 * w.eta.max(1.0),
            None | Some(AttackKind::None { .. }) => w.eta == 0.0,
            Some(_) => false,
        };
        if !ok {
            out.push(format!("sensor {id}: attack is not white Gaussian with covariance eta*I (eta = {})", w.eta));
        }
    }
    out
}

/// Errors `[x; θ_i] - X̂_i` at each checkpoint, per weak sensor.
type RunSamples = Vec<Vec<Vector>>;

fn sample_run(cfg: &ScenarioConfig, seed: u64, checkpoints: &[usize]) -> Result<(RunSamples, Vec<Vec<Mat>>)> {
    let mut sim = Simulator::new(cfg, seed)?;
    let last = *checkpoints.iter().max().expect("nonempty");
    let mut errs = Vec::new();
    let mut preds = Vec::new();
    let mut record = |sim: &Simulator<'_>| {
        let n = sim.n();
        let e: Vec<Vector> = sim
            .locals
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut truth = Vector::zeros(l.n_aug());
                truth.rows_mut(0, n).copy_from(&sim.x);
                truth.rows_mut(n, l.p()).copy_from(&sim.theta[i]);
                truth - &l.x_hat
            })
            .collect();
        errs.push(e);
        preds.push(sim.locals.iter().map(|l| l.p_x.clone()).collect());
    };
    if checkpoints.contains(&0) {
        record(&sim);
    }
    for k in 1..=last {
        sim.step()?;
        if checkpoints.contains(&k) {
            record(&sim);
        }
    }
    Ok((errs, preds))
}

/// Compares the sample second moment of the local augmented errors over
/// `runs` realizations with the predicted `P^X_ii(k)` at each checkpoint.
pub fn covariance_consistency_probe(cfg: &ScenarioConfig, runs: usize, checkpoints: &[usize]) -> Result<ConsistencyReport> {
    if runs < 1 || checkpoints.is_empty() {
        return Err(Error::Config("consistency probe needs runs >= 1 and at least one checkpoint".into()));
    }
    if let Some(k) = checkpoints.iter().find(|&&k| k > cfg.horizon) {
        return Err(Error::Config(format!("checkpoint {k} exceeds horizon {}", cfg.horizon)));
    }
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();

    let samples = with_pool(cfg.threads, || {
        (0..runs)
            .into_par_iter()
            .map(|r| sample_run(cfg, run_seed(cfg.seed, r), &cps))
            .collect::<Result<Vec<_>>>()
    })??;

    let weak = cfg.weak_ids();
    let mut points = Vec::new();
    for (c, &step) in cps.iter().enumerate() {
        for (i, &sensor) in weak.iter().enumerate() {
            let predicted = samples[0].1[c][i].clone();
            let dim = predicted.nrows();
            let mut empirical = Mat::zeros(dim, dim);
            for (errs, _) in &samples {
                let e = &errs[c][i];
                empirical += e * e.transpose();
            }
            empirical /= runs as f64;
            points.push(ConsistencyPoint { step, sensor, predicted, empirical });
        }
    }
    Ok(ConsistencyReport { runs, points, violations: consistency_violations(cfg) })
}
