//! Physical process, sensors, and the per-weak-sensor augmented subsystems.
//!
//! A weak-defense sensor may be tampered with; strong-defense sensors are
//! trusted. Each weak sensor is stacked with a set of strong sensors into an
//! enhanced measurement, and the attack signal on the weak channel is appended
//! to the state to form an augmented subsystem whose unknown input is the
//! attack increment.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, block_diag, numerical_rank, spd_factor, symmetrize, vstack, GaussianSampler, Mat, Vector};

const SYMMETRY_WARN: f64 = 1e-10;

/// A matrix that is either constant or given per time step.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSeq {
    Constant(Mat),
    PerStep(Vec<Mat>),
}

impl MatrixSeq {
    /// Matrix at step `k`. Per-step sequences hold their last entry past the end.
    pub fn at(&self, k: usize) -> &Mat {
        match self {
            MatrixSeq::Constant(m) => m,
            MatrixSeq::PerStep(v) => &v[k.min(v.len() - 1)],
        }
    }

    /// Whether the sequence defines a matrix for every step `0..=horizon`.
    pub fn covers(&self, horizon: usize) -> bool {
        match self {
            MatrixSeq::Constant(_) => true,
            MatrixSeq::PerStep(v) => v.len() > horizon,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.at(0).shape()
    }

    fn check(&self, what: &str) -> Result<()> {
        if let MatrixSeq::PerStep(v) = self {
            let first = v
                .first()
                .ok_or_else(|| Error::Config(format!("{what}: empty per-step sequence")))?
                .shape();
            if let Some(bad) = v.iter().find(|m| m.shape() != first) {
                return Err(Error::dim(what, first, bad.shape()));
            }
        }
        Ok(())
    }
}

impl From<Mat> for MatrixSeq {
    fn from(m: Mat) -> Self {
        MatrixSeq::Constant(m)
    }
}

/// Symmetrizes a covariance, warning when the input was noticeably asymmetric.
pub fn clean_covariance(m: &Mat, what: &str) -> Result<Mat> {
    if !m.is_square() {
        return Err(Error::dim(what, (m.nrows(), m.nrows()), m.shape()));
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_WARN {
        warn!("{what}: asymmetry {asym:.2e} exceeds {SYMMETRY_WARN:.0e}, symmetrizing");
    }
    Ok(symmetrize(m))
}

/// Linear process `x(k) = A(k) x(k-1) + w(k-1)`, `w ~ N(0, Q)`.
#[derive(Debug, Clone)]
pub struct SystemModel {
    n: usize,
    a: MatrixSeq,
    q: Mat,
    noise: GaussianSampler,
}

impl SystemModel {
    pub fn new(a: impl Into<MatrixSeq>, q: Mat) -> Result<Self> {
        let a = a.into();
        a.check("A")?;
        let (rows, cols) = a.shape();
        if rows != cols {
            return Err(Error::dim("A", (rows, rows), (rows, cols)));
        }
        let n = rows;
        if q.shape() != (n, n) {
            return Err(Error::dim("Q", (n, n), q.shape()));
        }
        let q = clean_covariance(&q, "Q")?;
        let noise = GaussianSampler::new(&q)?;
        Ok(Self { n, a, q, noise })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, k: usize) -> &Mat {
        self.a.at(k)
    }

    pub fn a_seq(&self) -> &MatrixSeq {
        &self.a
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Defense {
    Weak,
    Strong,
}

/// Raw sensor `y_i(k) = C_i(k) x(k) + v_i(k)`, `v_i ~ N(0, R_i)`.
#[derive(Debug, Clone)]
pub struct SensorSpec {
    pub id: usize,
    c: MatrixSeq,
    r: Mat,
    pub defense: Defense,
    noise: GaussianSampler,
}

impl SensorSpec {
    pub fn new(id: usize, c: impl Into<MatrixSeq>, r: Mat, defense: Defense) -> Result<Self> {
        let c = c.into();
        c.check(&format!("C of sensor {id}"))?;
        let p = c.shape().0;
        if p == 0 {
            return Err(Error::Config(format!("sensor {id}: empty measurement matrix")));
        }
        if r.shape() != (p, p) {
            return Err(Error::dim(format!("R of sensor {id}"), (p, p), r.shape()));
        }
        let r = clean_covariance(&r, &format!("R of sensor {id}"))?;
        let noise = GaussianSampler::new(&r)
            .map_err(|_| Error::Config(format!("sensor {id}: R is not positive semidefinite")))?;
        if spd_factor(&r).is_none() {
            warn!("sensor {id}: R is singular; measurements on that channel are noise-free");
        }
        Ok(Self { id, c, r, defense, noise })
    }

    /// Measurement dimension.
    pub fn p(&self) -> usize {
        self.c.shape().0
    }

    pub fn n(&self) -> usize {
        self.c.shape().1
    }

    pub fn c(&self, k: usize) -> &Mat {
        self.c.at(k)
    }

    pub fn c_seq(&self) -> &MatrixSeq {
        &self.c
    }

    pub fn r(&self) -> &Mat {
        &self.r
    }
}

/// A weak sensor stacked with its assigned strong sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedSensor {
    pub weak_id: usize,
    pub strong_ids: Vec<usize>,
    c: MatrixSeq,
    /// Selector of the weak rows, `[I_p; O; …; O]`.
    pub phi: Mat,
    /// Block-diagonal noise covariance in stacking order.
    pub r: Mat,
}

impl EnhancedSensor {
    pub fn p(&self) -> usize {
        self.phi.ncols()
    }

    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n(&self) -> usize {
        self.c.shape().1
    }

    pub fn c(&self, k: usize) -> &Mat {
        self.c.at(k)
    }
}

pub fn build_enhanced_sensor(weak: &SensorSpec, strongs: &[&SensorSpec]) -> Result<EnhancedSensor> {
    if weak.defense != Defense::Weak {
        return Err(Error::Config(format!("sensor {} is not weak-defense", weak.id)));
    }
    if let Some(s) = strongs.iter().find(|s| s.defense != Defense::Strong) {
        return Err(Error::Config(format!("sensor {} is not strong-defense", s.id)));
    }
    let n = weak.n();
    if let Some(s) = strongs.iter().find(|s| s.n() != n) {
        return Err(Error::dim(format!("C of sensor {}", s.id), (s.p(), n), (s.p(), s.n())));
    }
    if strongs.is_empty() {
        warn!("weak sensor {} has no strong-defense partners", weak.id);
    }

    let all: Vec<&SensorSpec> = std::iter::once(weak).chain(strongs.iter().copied()).collect();
    let stack_at = |k: usize| -> Result<Mat> {
        let blocks: Vec<&Mat> = all.iter().map(|s| s.c(k)).collect();
        vstack(&blocks)
    };
    let per_step: Vec<usize> = all
        .iter()
        .filter_map(|s| match s.c_seq() {
            MatrixSeq::PerStep(v) => Some(v.len()),
            MatrixSeq::Constant(_) => None,
        })
        .collect();
    let c = match per_step.iter().min() {
        None => MatrixSeq::Constant(stack_at(0)?),
        Some(&len) => MatrixSeq::PerStep((0..len).map(stack_at).collect::<Result<_>>()?),
    };

    let p = weak.p();
    let m: usize = all.iter().map(|s| s.p()).sum();
    let mut phi = Mat::zeros(m, p);
    phi.view_mut((0, 0), (p, p)).fill_with_identity();
    let rs: Vec<&Mat> = all.iter().map(|s| s.r()).collect();
    let r = block_diag(&rs);

    Ok(EnhancedSensor {
        weak_id: weak.id,
        strong_ids: strongs.iter().map(|s| s.id).collect(),
        c,
        phi,
        r,
    })
}

/// Augmented dynamics over `X_i = [x; θ_i]` at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSubsystem {
    pub n: usize,
    pub p: usize,
    /// `diag{A(k), I_p}`
    pub a: Mat,
    /// `[O_{n×p}; I_p]`
    pub phi: Mat,
    /// `[C_i(k), Φ_i]`
    pub c: Mat,
    /// `diag{Q, O}`
    pub q: Mat,
    /// Enhanced measurement noise covariance.
    pub r: Mat,
}

impl AugmentedSubsystem {
    pub fn n_aug(&self) -> usize {
        self.n + self.p
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }
}

pub fn build_augmented_subsystem(sys: &SystemModel, enh: &EnhancedSensor, k: usize) -> Result<AugmentedSubsystem> {
    let n = sys.n();
    let p = enh.p();
    if p == 0 {
        return Err(Error::Config(format!("weak sensor {}: attack channel has zero dimension", enh.weak_id)));
    }
    if enh.n() != n {
        return Err(Error::dim(format!("enhanced C of sensor {}", enh.weak_id), (enh.m(), n), (enh.m(), enh.n())));
    }
    let a = block_diag(&[sys.a(k), &Mat::identity(p, p)]);
    let mut phi = Mat::zeros(n + p, p);
    phi.view_mut((n, 0), (p, p)).fill_with_identity();
    let mut c = Mat::zeros(enh.m(), n + p);
    c.view_mut((0, 0), (enh.m(), n)).copy_from(enh.c(k));
    c.view_mut((0, n), (enh.m(), p)).copy_from(&enh.phi);
    let q = block_diag(&[sys.q(), &Mat::zeros(p, p)]);
    Ok(AugmentedSubsystem { n, p, a, phi, c, q, r: enh.r.clone() })
}

/// `[Q, O; O, O]` of shape `(n+p_i) × (n+p_j)`.
pub fn cross_process_noise(sys: &SystemModel, p_i: usize, p_j: usize) -> Mat {
    let n = sys.n();
    let mut out = Mat::zeros(n + p_i, n + p_j);
    out.view_mut((0, 0), (n, n)).copy_from(sys.q());
    out
}

/// Advances the truth by one step: `A(k) x_prev + w`.
pub fn step_truth<R: Rng + ?Sized>(sys: &SystemModel, x_prev: &Vector, k: usize, rng: &mut R) -> Result<Vector> {
    if x_prev.len() != sys.n() {
        return Err(Error::dim("state", (sys.n(), 1), (x_prev.len(), 1)));
    }
    Ok(sys.a(k) * x_prev + sys.noise.sample(rng))
}

/// Noisy raw measurement `C(k) x + v`.
pub fn measure<R: Rng + ?Sized>(spec: &SensorSpec, x: &Vector, k: usize, rng: &mut R) -> Result<Vector> {
    if x.len() != spec.n() {
        return Err(Error::dim(format!("state measured by sensor {}", spec.id), (spec.n(), 1), (x.len(), 1)));
    }
    Ok(spec.c(k) * x + spec.noise.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ObservabilityReport {
    pub rank: usize,
    pub dim: usize,
    pub horizon: usize,
    pub full_rank: bool,
}

/// Rank of `[C; C A; …; C A^{horizon-1}]` for the augmented pair.
pub fn check_observability(aug: &AugmentedSubsystem, horizon: usize) -> ObservabilityReport {
    let dim = aug.n_aug();
    let m = aug.m();
    let mut obs = Mat::zeros(m * horizon, dim);
    let mut block = aug.c.clone();
    for h in 0..horizon {
        obs.view_mut((h * m, 0), (m, dim)).copy_from(&block);
        block = &block * &aug.a;
    }
    let rank = numerical_rank(&obs);
    ObservabilityReport { rank, dim, horizon, full_rank: rank == dim }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(v: &[f64]) -> Mat {
        Mat::from_row_slice(1, v.len(), v)
    }

    fn scalar(v: f64) -> Mat {
        Mat::from_element(1, 1, v)
    }

    fn paper_a() -> Mat {
        Mat::from_row_slice(
            4,
            4,
            &[-0.837, 0.5427, 0.0, 0.0, -0.5427, -0.837, 0.0, 0.0, 0.0, 0.0, 0.9851, 0.0, 0.0, 0.0, 0.0, 0.9556],
        )
    }

    fn q4() -> Mat {
        Mat::from_diagonal(&Vector::from_vec(vec![0.1, 0.2, 0.3, 0.2]))
    }

    fn sensor(id: usize, c: &[f64], d: Defense) -> SensorSpec {
        SensorSpec::new(id, row(c), scalar(0.1), d).unwrap()
    }

    #[test]
    fn enhanced_sensor_stacks_weak_then_strong() {
        let s1 = sensor(1, &[1., 0., 0., 0.], Defense::Weak);
        let s3 = sensor(3, &[1., 0., 0., 1.], Defense::Strong);
        let s4 = sensor(4, &[0., 0., 1., 1.], Defense::Strong);
        let e = build_enhanced_sensor(&s1, &[&s3, &s4]).unwrap();
        let expected = Mat::from_row_slice(3, 4, &[1., 0., 0., 0., 1., 0., 0., 1., 0., 0., 1., 1.]);
        assert_eq!(e.c(0), &expected);
        assert_eq!(e.phi, Mat::from_column_slice(3, 1, &[1., 0., 0.]));
        assert_eq!(e.r, Mat::identity(3, 3) * 0.1);
        assert_eq!(e.strong_ids, vec![3, 4]);
    }

    #[test]
    fn enhanced_sensor_without_strongs() {
        let w = SensorSpec::new(1, row(&[1.0]), scalar(0.1), Defense::Weak).unwrap();
        let e = build_enhanced_sensor(&w, &[]).unwrap();
        assert_eq!(e.c(0), &row(&[1.0]));
        assert_eq!(e.phi, scalar(1.0));
        assert_eq!(e.r, scalar(0.1));
    }

    #[test]
    fn enhanced_sensor_two_dim_weak() {
        let w = SensorSpec::new(1, Mat::identity(2, 2), Mat::identity(2, 2) * 0.5, Defense::Weak).unwrap();
        let s = SensorSpec::new(2, row(&[1.0, 1.0]), scalar(0.2), Defense::Strong).unwrap();
        let e = build_enhanced_sensor(&w, &[&s]).unwrap();
        let mut phi = Mat::zeros(3, 2);
        phi[(0, 0)] = 1.0;
        phi[(1, 1)] = 1.0;
        assert_eq!(e.phi, phi);
        assert_eq!(e.r, block_diag(&[&(Mat::identity(2, 2) * 0.5), &scalar(0.2)]));
    }

    #[test]
    fn enhanced_sensor_rejects_bad_inputs() {
        let w = sensor(1, &[1., 0., 0., 0.], Defense::Weak);
        let s = sensor(2, &[1., 0.], Defense::Strong);
        assert!(matches!(build_enhanced_sensor(&w, &[&s]), Err(Error::Dimension { .. })));
        let not_strong = sensor(3, &[1., 0., 0., 0.], Defense::Weak);
        assert!(build_enhanced_sensor(&w, &[&not_strong]).is_err());
        assert!(build_enhanced_sensor(&not_strong.clone(), &[]).is_ok());
        let strong = sensor(4, &[1., 0., 0., 0.], Defense::Strong);
        assert!(build_enhanced_sensor(&strong, &[]).is_err());
    }

    #[test]
    fn augmented_subsystem_for_first_weak_sensor() {
        let sys = SystemModel::new(paper_a(), q4()).unwrap();
        let s1 = sensor(1, &[1., 0., 0., 0.], Defense::Weak);
        let s3 = sensor(3, &[1., 0., 0., 1.], Defense::Strong);
        let s4 = sensor(4, &[0., 0., 1., 1.], Defense::Strong);
        let e = build_enhanced_sensor(&s1, &[&s3, &s4]).unwrap();
        let aug = build_augmented_subsystem(&sys, &e, 0).unwrap();
        assert_eq!(aug.a.view((0, 0), (4, 4)), paper_a().view((0, 0), (4, 4)));
        assert_eq!(aug.a[(4, 4)], 1.0);
        assert_eq!(aug.a.row(4).iter().take(4).sum::<f64>(), 0.0);
        let ca = Mat::from_row_slice(3, 5, &[1., 0., 0., 0., 1., 1., 0., 0., 1., 0., 0., 0., 1., 1., 0.]);
        assert_eq!(aug.c, ca);
        // C_a = [C_i | Φ_i]
        assert_eq!(aug.c.columns(4, 1), e.phi.columns(0, 1));
        assert_eq!(aug.q[(4, 4)], 0.0);
    }

    #[test]
    fn augmented_subsystem_scalar() {
        let sys = SystemModel::new(scalar(1.0), scalar(1.0)).unwrap();
        let w = SensorSpec::new(1, row(&[1.0]), scalar(0.1), Defense::Weak).unwrap();
        let e = build_enhanced_sensor(&w, &[]).unwrap();
        let aug = build_augmented_subsystem(&sys, &e, 0).unwrap();
        assert_eq!(aug.a, Mat::identity(2, 2));
        assert_eq!(aug.phi, Mat::from_column_slice(2, 1, &[0.0, 1.0]));
        assert_eq!(aug.q, Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn zero_dimensional_attack_channel_rejected() {
        let sys = SystemModel::new(scalar(1.0), scalar(1.0)).unwrap();
        let e = EnhancedSensor {
            weak_id: 1,
            strong_ids: vec![],
            c: MatrixSeq::Constant(row(&[1.0])),
            phi: Mat::zeros(1, 0),
            r: scalar(0.1),
        };
        assert!(build_augmented_subsystem(&sys, &e, 0).is_err());
    }

    #[test]
    fn cross_noise_shapes() {
        let sys = SystemModel::new(paper_a(), q4()).unwrap();
        let q = cross_process_noise(&sys, 1, 1);
        assert_eq!(q.shape(), (5, 5));
        assert_eq!(q.view((0, 0), (4, 4)), q4().view((0, 0), (4, 4)));
        assert_eq!(q.row(4).sum() + q.column(4).sum(), 0.0);
        assert_eq!(cross_process_noise(&sys, 1, 2).shape(), (5, 6));
        let zero = SystemModel::new(paper_a(), Mat::zeros(4, 4)).unwrap();
        assert_eq!(cross_process_noise(&zero, 1, 1), Mat::zeros(5, 5));
    }

    #[test]
    fn cross_noise_agrees_with_augmented_q() {
        let sys = SystemModel::new(paper_a(), q4()).unwrap();
        let s1 = sensor(1, &[1., 0., 0., 0.], Defense::Weak);
        let e = build_enhanced_sensor(&s1, &[]).unwrap();
        let aug = build_augmented_subsystem(&sys, &e, 0).unwrap();
        for pj in 1..3 {
            let q = cross_process_noise(&sys, 1, pj);
            assert_eq!(q.view((0, 0), (4, 4)), aug.q.view((0, 0), (4, 4)));
        }
    }

    #[test]
    fn noiseless_truth_is_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sys = SystemModel::new(Mat::identity(2, 2), Mat::zeros(2, 2)).unwrap();
        let x = Vector::from_vec(vec![1.0, 2.0]);
        assert_eq!(step_truth(&sys, &x, 1, &mut rng).unwrap(), x);

        let sys = SystemModel::new(paper_a(), Mat::zeros(4, 4)).unwrap();
        let e3 = Vector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let next = step_truth(&sys, &e3, 1, &mut rng).unwrap();
        assert_eq!(next, e3 * 0.9851);
        assert!(step_truth(&sys, &Vector::zeros(3), 1, &mut rng).is_err());
    }

    #[test]
    fn truth_noise_mean_within_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sys = SystemModel::new(paper_a(), q4()).unwrap();
        let draws = 10_000;
        let mut sum = Vector::zeros(4);
        for _ in 0..draws {
            sum += step_truth(&sys, &Vector::zeros(4), 1, &mut rng).unwrap();
        }
        let mean = sum / draws as f64;
        for i in 0..4 {
            let sigma = (q4()[(i, i)] / draws as f64).sqrt();
            assert!(mean[i].abs() < 4.0 * sigma, "component {i}: {}", mean[i]);
        }
    }

    #[test]
    fn noiseless_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s1 = SensorSpec::new(1, row(&[1., 0., 0., 0.]), scalar(0.0), Defense::Weak).unwrap();
        let y = measure(&s1, &Vector::from_vec(vec![2., 0., 0., 0.]), 0, &mut rng).unwrap();
        assert_eq!(y[0], 2.0);
        let s3 = SensorSpec::new(3, row(&[1., 0., 0., 1.]), scalar(0.0), Defense::Strong).unwrap();
        let y = measure(&s3, &Vector::from_vec(vec![1., 0., 0., 1.]), 0, &mut rng).unwrap();
        assert_eq!(y[0], 2.0);
        assert!(SensorSpec::new(4, row(&[1.0]), scalar(-1.0), Defense::Strong).is_err());
    }

    #[test]
    fn measurement_variance_matches_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = sensor(1, &[1., 0., 0., 0.], Defense::Weak);
        let x = Vector::from_vec(vec![0.5, 0., 0., 0.]);
        let draws = 10_000;
        let ys: Vec<f64> = (0..draws).map(|_| measure(&s, &x, 0, &mut rng).unwrap()[0]).collect();
        let mean = ys.iter().sum::<f64>() / draws as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        assert!((var - 0.1).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn observability_reports() {
        let sys = SystemModel::new(paper_a(), q4()).unwrap();
        let s1 = sensor(1, &[1., 0., 0., 0.], Defense::Weak);
        let s2 = sensor(2, &[0., 0., 1., 0.], Defense::Weak);
        let s3 = sensor(3, &[1., 0., 0., 1.], Defense::Strong);
        let s4 = sensor(4, &[0., 0., 1., 1.], Defense::Strong);
        let s5 = sensor(5, &[0., 1., 1., 0.], Defense::Strong);
        for (w, st) in [(&s1, [&s3, &s4]), (&s2, [&s3, &s5])] {
            let e = build_enhanced_sensor(w, &st).unwrap();
            let aug = build_augmented_subsystem(&sys, &e, 0).unwrap();
            let rep = check_observability(&aug, aug.n_aug());
            assert_eq!(rep.rank, 5);
            assert!(rep.full_rank);
        }

        let mut aug = build_augmented_subsystem(&sys, &build_enhanced_sensor(&s1, &[&s3]).unwrap(), 0).unwrap();
        aug.c = Mat::zeros(2, 5);
        let rep = check_observability(&aug, 5);
        assert_eq!((rep.rank, rep.full_rank), (0, false));

        aug.a = Mat::identity(5, 5);
        aug.c = Mat::identity(5, 5);
        let rep = check_observability(&aug, 1);
        assert!(rep.full_rank);
    }

    #[test]
    fn per_step_matrices_are_indexed_by_step() {
        let seq = MatrixSeq::PerStep(vec![scalar(1.0), scalar(2.0), scalar(3.0)]);
        assert_eq!(seq.at(1)[(0, 0)], 2.0);
        assert!(seq.covers(2));
        assert!(!seq.covers(3));
        let sys = SystemModel::new(seq, scalar(0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = step_truth(&sys, &Vector::from_element(1, 1.0), 2, &mut rng).unwrap();
        assert_eq!(x[0], 3.0);
    }

    #[test]
    fn asymmetric_covariance_is_symmetrized() {
        let q = Mat::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        let sys = SystemModel::new(Mat::identity(2, 2), q).unwrap();
        assert_eq!(sys.q()[(0, 1)], sys.q()[(1, 0)]);
        assert!((sys.q()[(0, 1)] - 0.1).abs() < 1e-15);
    }
}
