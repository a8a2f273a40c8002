use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attack::{assemble_measurement, generate_attack, inject_attack, AttackSpec};
use crate::baseline::{akf_step, AkfState};
use crate::cross::{init_cross_pair, propagate_cross, CrossInput, CrossState};
use crate::error::{Error, Result};
use crate::fusion::{assemble_sigma, compute_weights, fuse_states, state_block, FusionWeights};
use crate::linalg::{GaussianSampler, Mat, Vector};
use crate::local::{init_local, step_local, LocalEstimatorState, LocalStep};
use crate::model::{
    build_augmented_subsystem, build_enhanced_sensor, cross_process_noise, measure, step_truth, AugmentedSubsystem,
    EnhancedSensor, SensorSpec,
};

use super::config::{ScenarioConfig, WeakConfig};

/// Seed of Monte Carlo run `index`.
pub fn run_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Cross state of the weak-sensor pair at positions `(a, b)`, `a < b`.
#[derive(Debug, Clone)]
pub struct CrossPair {
    pub a: usize,
    pub b: usize,
    pub fwd: CrossState,
    pub rev: CrossState,
}

/// Step-by-step driver of one realization: truth, attacks, local estimators,
/// cross covariances, fusion and the baseline filters.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    cfg: &'a ScenarioConfig,
    weak_ids: Vec<usize>,
    weak_cfg: Vec<WeakConfig>,
    enhanced: Vec<EnhancedSensor>,
    attacks: Vec<AttackSpec>,
    rng: ChaCha8Rng,
    pub k: usize,
    pub x: Vector,
    /// `θ_i(k)` per weak sensor.
    pub theta: Vec<Vector>,
    pub locals: Vec<LocalEstimatorState>,
    pub cross: Vec<CrossPair>,
    pub akf: Vec<AkfState>,
    pub weights: FusionWeights,
    pub fused: Vector,
    /// Outputs of the most recent local steps.
    pub last: Option<Vec<LocalStep>>,
}

impl<'a> Simulator<'a> {
    pub fn new(cfg: &'a ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let weak_ids = cfg.weak_ids();
        let weak_cfg: Vec<WeakConfig> = weak_ids.iter().map(|&i| cfg.weak_config(i)).collect();
        let enhanced = weak_ids
            .iter()
            .map(|&i| {
                let weak = cfg.sensor(i).expect("validated");
                let strongs: Vec<&SensorSpec> =
                    cfg.strong_assignment(i).iter().map(|&s| cfg.sensor(s).expect("validated")).collect();
                build_enhanced_sensor(weak, &strongs)
            })
            .collect::<Result<Vec<_>>>()?;
        let attacks = weak_ids
            .iter()
            .zip(&enhanced)
            .map(|(&i, e)| cfg.attack(i).cloned().unwrap_or_else(|| AttackSpec::none(i, e.p())))
            .collect::<Vec<_>>();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = &cfg.x0_mean + GaussianSampler::new(&cfg.x0_cov)?.sample(&mut rng);
        let theta = attacks.iter().map(|a| generate_attack(a, 0, &mut rng)).collect::<Result<Vec<_>>>()?;

        let mut locals = Vec::with_capacity(weak_ids.len());
        let mut akf = Vec::with_capacity(weak_ids.len());
        for ((&id, w), e) in weak_ids.iter().zip(&weak_cfg).zip(&enhanced) {
            let aug = build_augmented_subsystem(&cfg.system, e, 0)?;
            let local = init_local(id, &aug, &w.init, w.eta_at(0))?;
            let p0 = cfg.baseline.p0.clone().unwrap_or_else(|| local.p_x.clone());
            akf.push(AkfState::new(id, local.x_hat.clone(), p0, cfg.baseline.q_theta)?);
            locals.push(local);
        }

        let mut cross = Vec::new();
        for a in 0..weak_ids.len() {
            for b in a + 1..weak_ids.len() {
                let (pa, pb) = (enhanced[a].p(), enhanced[b].p());
                let init = cfg.cross_init.get(&(weak_ids[a], weak_ids[b])).cloned().unwrap_or_default();
                let (fwd, rev) = init_cross_pair(
                    (weak_ids[a], weak_ids[b]),
                    (pa, pb),
                    cross_process_noise(&cfg.system, pa, pb),
                    &init,
                )?;
                cross.push(CrossPair { a, b, fwd, rev });
            }
        }

        let (weights, fused) = fuse(cfg.system.n(), &locals, &cross).map_err(|e| e.at_step(0))?;
        Ok(Self {
            cfg,
            weak_ids,
            weak_cfg,
            enhanced,
            attacks,
            rng,
            k: 0,
            x,
            theta,
            locals,
            cross,
            akf,
            weights,
            fused,
            last: None,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        self.cfg
    }

    pub fn weak_ids(&self) -> &[usize] {
        &self.weak_ids
    }

    pub fn n(&self) -> usize {
        self.cfg.system.n()
    }

    /// Augmented subsystem of the weak sensor at position `idx` for step `k`.
    pub fn augmented(&self, idx: usize, k: usize) -> Result<AugmentedSubsystem> {
        build_augmented_subsystem(&self.cfg.system, &self.enhanced[idx], k)
    }

    /// Local states ready for step `k + 1`, with the compensation factor of
    /// that step applied.
    pub fn pending_locals(&self) -> Vec<LocalEstimatorState> {
        let k = self.k + 1;
        self.locals
            .iter()
            .zip(&self.weak_cfg)
            .map(|(l, w)| LocalEstimatorState { eta: w.eta_at(k), ..l.clone() })
            .collect()
    }

    /// Advances everything from step `k` to `k + 1`.
    pub fn step(&mut self) -> Result<()> {
        let k = self.k + 1;
        self.advance(k).map_err(|e| e.at_step(k))
    }

    fn advance(&mut self, k: usize) -> Result<()> {
        let cfg = self.cfg;
        let x = step_truth(&cfg.system, &self.x, k, &mut self.rng)?;
        let raw = cfg
            .sensors
            .iter()
            .map(|s| Ok((s.id, measure(s, &x, k, &mut self.rng)?)))
            .collect::<Result<Vec<_>>>()?;
        let theta = self
            .attacks
            .iter()
            .map(|a| generate_attack(a, k, &mut self.rng))
            .collect::<Result<Vec<_>>>()?;
        let raw_of = |id: usize| &raw.iter().find(|(i, _)| *i == id).expect("every sensor measured").1;

        let pending = self.pending_locals();
        let mut steps = Vec::with_capacity(self.weak_ids.len());
        let mut augs = Vec::with_capacity(self.weak_ids.len());
        let mut akf = Vec::with_capacity(self.weak_ids.len());
        for (idx, e) in self.enhanced.iter().enumerate() {
            let aug = self.augmented(idx, k)?;
            let y_weak = inject_attack(raw_of(e.weak_id), &theta[idx])?;
            let y_strong: Vec<Vector> = e.strong_ids.iter().map(|&s| raw_of(s).clone()).collect();
            let y = assemble_measurement(e, &y_weak, &y_strong)?;
            steps.push(step_local(&pending[idx], &y, &aug)?);
            akf.push(akf_step(&self.akf[idx], &y, &aug)?);
            augs.push(aug);
        }

        let cross = self
            .cross
            .iter()
            .map(|c| {
                let (fwd, rev) = propagate_cross(
                    &c.fwd,
                    &c.rev,
                    CrossInput { gains: &steps[c.a].gains, aug: &augs[c.a] },
                    CrossInput { gains: &steps[c.b].gains, aug: &augs[c.b] },
                );
                CrossPair { a: c.a, b: c.b, fwd, rev }
            })
            .collect::<Vec<_>>();
        let locals: Vec<LocalEstimatorState> = steps.iter().map(|s| s.state.clone()).collect();
        let (weights, fused) = fuse(cfg.system.n(), &locals, &cross)?;

        self.k = k;
        self.x = x;
        self.theta = theta;
        self.locals = locals;
        self.cross = cross;
        self.akf = akf;
        self.weights = weights;
        self.fused = fused;
        self.last = Some(steps);
        Ok(())
    }
}

fn fuse(n: usize, locals: &[LocalEstimatorState], cross: &[CrossPair]) -> Result<(FusionWeights, Vector)> {
    let r = locals.len();
    let mut blocks: Vec<Vec<Mat>> = (0..r).map(|_| vec![Mat::zeros(n, n); r]).collect();
    for (i, l) in locals.iter().enumerate() {
        blocks[i][i] = state_block(&l.p_x, n);
    }
    for c in cross {
        blocks[c.a][c.b] = state_block(&c.fwd.p_x, n);
        blocks[c.b][c.a] = state_block(&c.rev.p_x, n);
    }
    let weights = compute_weights(&assemble_sigma(&blocks)?, n)?;
    let xs: Vec<Vector> = locals.iter().map(|l| l.x_hat.rows(0, n).into_owned()).collect();
    let fused = fuse_states(&weights, &xs)?.x0_hat;
    Ok((weights, fused))
}

/// Full trajectory of one realization, indexed `[sensor][k]` for per-sensor
/// series and `[k]` otherwise. Every series has `K + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub weak_ids: Vec<usize>,
    pub truth: Vec<Vector>,
    pub theta: Vec<Vec<Vector>>,
    pub local_x: Vec<Vec<Vector>>,
    pub local_theta: Vec<Vec<Vector>>,
    pub fused: Vec<Vector>,
    pub akf_x: Vec<Vec<Vector>>,
    pub akf_theta: Vec<Vec<Vector>>,
    /// `trace P^X_ii(k)`
    pub trace_p_x: Vec<Vec<f64>>,
    /// `‖Σ_i G_i(k) - I‖_max`
    pub normalization_error: Vec<f64>,
}

impl RunRecord {
    fn empty(seed: u64, weak_ids: &[usize], len: usize) -> Self {
        let r = weak_ids.len();
        let per = || vec![Vec::with_capacity(len); r];
        Self {
            seed,
            weak_ids: weak_ids.to_vec(),
            truth: Vec::with_capacity(len),
            theta: per(),
            local_x: per(),
            local_theta: per(),
            fused: Vec::with_capacity(len),
            akf_x: per(),
            akf_theta: per(),
            trace_p_x: vec![Vec::with_capacity(len); r],
            normalization_error: Vec::with_capacity(len),
        }
    }

    fn push(&mut self, sim: &Simulator<'_>) {
        let n = sim.n();
        self.truth.push(sim.x.clone());
        for (i, l) in sim.locals.iter().enumerate() {
            let p = l.p();
            self.theta[i].push(sim.theta[i].clone());
            self.local_x[i].push(l.x_hat.rows(0, n).into_owned());
            self.local_theta[i].push(l.x_hat.rows(n, p).into_owned());
            self.akf_x[i].push(sim.akf[i].x(n));
            self.akf_theta[i].push(sim.akf[i].theta(n));
            self.trace_p_x[i].push(l.p_x.trace());
        }
        self.fused.push(sim.fused.clone());
        self.normalization_error.push(sim.weights.normalization_error());
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<RunRecord> {
    let mut sim = Simulator::new(cfg, seed)?;
    let mut rec = RunRecord::empty(seed, sim.weak_ids(), cfg.horizon + 1);
    rec.push(&sim);
    for _ in 0..cfg.horizon {
        sim.step()?;
        rec.push(&sim);
    }
    Ok(rec)
}

/// Squared error curves of one run.
#[derive(Debug, Clone)]
struct RunErrors {
    fused: Vec<f64>,
    fused_components: Vec<Vector>,
    local: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    akf: Vec<Vec<f64>>,
    akf_theta: Vec<Vec<f64>>,
    max_normalization_error: f64,
}

fn sq(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm_squared()
}

impl RunErrors {
    fn from_record(rec: &RunRecord) -> Self {
        let per = |est: &Vec<Vec<Vector>>, truth: &dyn Fn(usize, usize) -> Vector| {
            est.iter()
                .enumerate()
                .map(|(i, s)| s.iter().enumerate().map(|(k, e)| sq(e, &truth(i, k))).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        let x_truth = |_: usize, k: usize| rec.truth[k].clone();
        let th_truth = |i: usize, k: usize| rec.theta[i][k].clone();
        Self {
            fused: rec.fused.iter().zip(&rec.truth).map(|(f, x)| sq(f, x)).collect(),
            fused_components: rec.fused.iter().zip(&rec.truth).map(|(f, x)| (f - x).map(|e| e * e)).collect(),
            local: per(&rec.local_x, &x_truth),
            theta: per(&rec.local_theta, &th_truth),
            akf: per(&rec.akf_x, &x_truth),
            akf_theta: per(&rec.akf_theta, &th_truth),
            max_normalization_error: rec.normalization_error.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub run: usize,
    pub seed: u64,
    pub error: Error,
}

/// Monte Carlo mean squared error curves, indexed `[k]` or `[sensor][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MseReport {
    pub seed: u64,
    pub runs: usize,
    pub completed: usize,
    pub weak_ids: Vec<usize>,
    pub fused: Vec<f64>,
    /// Per-component squared error of the fused estimate.
    pub fused_components: Vec<Vector>,
    pub local: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub akf: Vec<Vec<f64>>,
    pub akf_theta: Vec<Vec<f64>>,
    /// Largest `‖Σ_i G_i - I‖_max` over every step of every run.
    pub max_normalization_error: f64,
    pub failures: Vec<RunFailure>,
}

impl MseReport {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn len(&self) -> usize {
        self.fused.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fused.is_empty()
    }
}

/// Mean of `curve[k]` over `k ∈ range`.
pub fn time_average(curve: &[f64], range: std::ops::RangeInclusive<usize>) -> f64 {
    let vals = &curve[*range.start()..=*range.end()];
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Runs `f` on a dedicated pool when a thread count is configured.
pub(crate) fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run_monte_carlo(cfg: &ScenarioConfig) -> Result<MseReport> {
    cfg.validate()?;
    let results: Vec<Result<RunErrors>> = with_pool(cfg.threads, || {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| run_scenario(cfg, run_seed(cfg.seed, r)).map(|rec| RunErrors::from_record(&rec)))
            .collect()
    })?;

    let len = cfg.horizon + 1;
    let r = cfg.weak_ids().len();
    let n = cfg.system.n();
    let zeros = || vec![vec![0.0; len]; r];
    let mut report = MseReport {
        seed: cfg.seed,
        runs: cfg.runs,
        completed: 0,
        weak_ids: cfg.weak_ids(),
        fused: vec![0.0; len],
        fused_components: vec![Vector::zeros(n); len],
        local: zeros(),
        theta: zeros(),
        akf: zeros(),
        akf_theta: zeros(),
        max_normalization_error: 0.0,
        failures: Vec::new(),
    };
    let add = |acc: &mut Vec<Vec<f64>>, e: &Vec<Vec<f64>>| {
        for (a, e) in acc.iter_mut().zip(e) {
            for (a, e) in a.iter_mut().zip(e) {
                *a += e;
            }
        }
    };
    for (run, res) in results.into_iter().enumerate() {
        match res {
            Ok(e) => {
                report.completed += 1;
                for (a, v) in report.fused.iter_mut().zip(&e.fused) {
                    *a += v;
                }
                for (a, v) in report.fused_components.iter_mut().zip(&e.fused_components) {
                    *a += v;
                }
                add(&mut report.local, &e.local);
                add(&mut report.theta, &e.theta);
                add(&mut report.akf, &e.akf);
                add(&mut report.akf_theta, &e.akf_theta);
                report.max_normalization_error = report.max_normalization_error.max(e.max_normalization_error);
            }
            Err(error) => {
                let seed = run_seed(cfg.seed, run);
                warn!("run {run} (seed {seed}) failed: {error}");
                report.failures.push(RunFailure { run, seed, error });
            }
        }
    }
    if report.completed == 0 {
        let first = report.failures.swap_remove(0);
        return Err(first.error);
    }
    let scale = 1.0 / report.completed as f64;
    report.fused.iter_mut().for_each(|v| *v *= scale);
    report.fused_components.iter_mut().for_each(|v| *v *= scale);
    for curves in [&mut report.local, &mut report.theta, &mut report.akf, &mut report.akf_theta] {
        curves.iter_mut().flatten().for_each(|v| *v *= scale);
    }
    Ok(report)
}
