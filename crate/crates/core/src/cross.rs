//! Error cross-covariances between two local estimators.
//!
//! The recursion for the `(i, j)` matrices reads `U_ji` and `Y_ji`, so both
//! directions of a pair are stored and advanced together.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::local::{GainPair, GainTerms};
use crate::model::AugmentedSubsystem;

/// Overrides for the step-0 cross matrices; all default to zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrossInit {
    pub p_x: Option<Mat>,
    pub p_phi: Option<Mat>,
    pub u: Option<Mat>,
    pub y: Option<Mat>,
    pub v: Option<Mat>,
}

/// Cross matrices of the ordered pair `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossState {
    pub i: usize,
    pub j: usize,
    /// `E{X̃_i X̃_jᵀ}`, `(n+p_i) × (n+p_j)`
    pub p_x: Mat,
    /// `E{φ̃_i φ̃_jᵀ}`
    pub p_phi: Mat,
    /// `E{X̃_i φ̂_jᵀ}`, `(n+p_i) × p_j`
    pub u: Mat,
    /// `E{φ̃_i φ̂_jᵀ}`
    pub y: Mat,
    /// `E{φ̂_i φ̂_jᵀ}`
    pub v: Mat,
    /// Cross process noise `[Q, O; O, O]`.
    pub q_a: Mat,
}

pub fn init_cross(
    (i, j): (usize, usize),
    (p_i, p_j): (usize, usize),
    q_a: Mat,
    init: &CrossInit,
) -> Result<CrossState> {
    if i == j {
        return Err(Error::Config(format!("cross state needs distinct sensors, got ({i}, {j})")));
    }
    let n = q_a.nrows().checked_sub(p_i).ok_or_else(|| Error::dim("cross Q", (p_i, p_j), q_a.shape()))?;
    if q_a.shape() != (n + p_i, n + p_j) {
        return Err(Error::dim("cross Q", (n + p_i, n + p_j), q_a.shape()));
    }
    let pick = |m: &Option<Mat>, shape: (usize, usize), what: &str| -> Result<Mat> {
        match m {
            Some(m) if m.shape() != shape => Err(Error::dim(what, shape, m.shape())),
            Some(m) => Ok(m.clone()),
            None => Ok(Mat::zeros(shape.0, shape.1)),
        }
    };
    Ok(CrossState {
        i,
        j,
        p_x: pick(&init.p_x, (n + p_i, n + p_j), "initial cross P^X")?,
        p_phi: pick(&init.p_phi, (p_i, p_j), "initial cross P^φ")?,
        u: pick(&init.u, (n + p_i, p_j), "initial cross U")?,
        y: pick(&init.y, (p_i, p_j), "initial cross Y")?,
        v: pick(&init.v, (p_i, p_j), "initial cross V")?,
        q_a,
    })
}

/// Initial state of the reverse direction, transposing the forward overrides
/// where the matrices are transposes of each other.
pub fn init_cross_pair(
    (i, j): (usize, usize),
    (p_i, p_j): (usize, usize),
    q_a_ij: Mat,
    init: &CrossInit,
) -> Result<(CrossState, CrossState)> {
    let q_a_ji = q_a_ij.transpose();
    let fwd = init_cross((i, j), (p_i, p_j), q_a_ij, init)?;
    let rev_init = CrossInit {
        p_x: init.p_x.as_ref().map(|m| m.transpose()),
        p_phi: init.p_phi.as_ref().map(|m| m.transpose()),
        v: init.v.as_ref().map(|m| m.transpose()),
        ..CrossInit::default()
    };
    let rev = init_cross((j, i), (p_j, p_i), q_a_ji, &rev_init)?;
    Ok((fwd, rev))
}

/// Per-sensor inputs of a cross step: the step-`k` gains and augmented matrices.
#[derive(Debug, Clone, Copy)]
pub struct CrossInput<'a> {
    pub gains: &'a GainPair,
    pub aug: &'a AugmentedSubsystem,
}

fn directed(
    ij: &CrossState,
    ji: &CrossState,
    (ai, ti): (&AugmentedSubsystem, &GainTerms),
    (aj, tj): (&AugmentedSubsystem, &GainTerms),
) -> CrossState {
    let xi1 = &ij.p_phi + &ij.y + ji.y.transpose();
    let ai_u = &ai.a * &ij.u;
    let xi = &ai.a * &ij.p_x * aj.a.transpose()
        - &ai_u * aj.phi.transpose()
        - &ai.phi * ji.u.transpose() * aj.a.transpose()
        - &ai.phi * &xi1 * aj.phi.transpose()
        + &ij.q_a;

    let gci_xi_gcjt = &ti.gamma_c * &xi * tj.gamma_c.transpose();
    let uji_gbjt = ji.u.transpose() * tj.gamma_b.transpose();
    let gbi_uij = &ti.gamma_b * &ij.u;

    let p_phi = &ti.gamma_c_phi * &xi1 - &xi1 * tj.gamma_a.transpose() + &uji_gbjt + &gbi_uij + &gci_xi_gcjt;
    let p_x = &ti.k_a * &xi * tj.k_a.transpose();
    let u = &ti.k_a * (&ai_u - &ai.phi * &ij.v) + &ti.k_a * &xi * tj.gamma_c.transpose();
    let y = -&uji_gbjt - &gbi_uij - &xi1 * tj.gamma_c_phi.transpose() - &ti.gamma_a * &ij.v - &gci_xi_gcjt;
    let v = &gci_xi_gcjt + &ij.v * tj.gamma_a.transpose() - &ti.gamma_c_phi * &ij.v + &uji_gbjt + &gbi_uij;

    CrossState { i: ij.i, j: ij.j, p_x, p_phi, u, y, v, q_a: ij.q_a.clone() }
}

/// Advances both directions of a pair from step `k-1` to `k`.
pub fn propagate_cross(
    ij: &CrossState,
    ji: &CrossState,
    input_i: CrossInput<'_>,
    input_j: CrossInput<'_>,
) -> (CrossState, CrossState) {
    let ti = GainTerms::new(input_i.gains, input_i.aug);
    let tj = GainTerms::new(input_j.gains, input_j.aug);
    let fwd = directed(ij, ji, (input_i.aug, &ti), (input_j.aug, &tj));
    let rev = directed(ji, ij, (input_j.aug, &tj), (input_i.aug, &ti));
    (fwd, rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::local::{init_local, step_local, LocalInit};
    use crate::model::{build_augmented_subsystem, build_enhanced_sensor, cross_process_noise, Defense, SensorSpec, SystemModel};

    fn scalar(v: f64) -> Mat {
        Mat::from_element(1, 1, v)
    }

    fn pair_system(q: f64) -> (SystemModel, AugmentedSubsystem, AugmentedSubsystem) {
        let sys = SystemModel::new(scalar(1.0), scalar(q)).unwrap();
        let w1 = SensorSpec::new(1, scalar(1.0), scalar(1.0), Defense::Weak).unwrap();
        let w2 = SensorSpec::new(2, scalar(1.0), scalar(1.0), Defense::Weak).unwrap();
        let a1 = build_augmented_subsystem(&sys, &build_enhanced_sensor(&w1, &[]).unwrap(), 1).unwrap();
        let a2 = build_augmented_subsystem(&sys, &build_enhanced_sensor(&w2, &[]).unwrap(), 1).unwrap();
        (sys, a1, a2)
    }

    #[test]
    fn defaults_are_zero() {
        let sys = SystemModel::new(Mat::identity(4, 4), Mat::identity(4, 4)).unwrap();
        let (f, r) = init_cross_pair((1, 2), (1, 1), cross_process_noise(&sys, 1, 1), &CrossInit::default()).unwrap();
        assert_eq!(f.p_x, Mat::zeros(5, 5));
        assert_eq!(f.p_phi, scalar(0.0));
        assert_eq!(f.u, Mat::zeros(5, 1));
        assert_eq!((r.i, r.j), (2, 1));
    }

    #[test]
    fn overrides_and_errors() {
        let sys = SystemModel::new(Mat::identity(4, 4), Mat::identity(4, 4)).unwrap();
        let m = Mat::from_fn(5, 5, |r, c| (r * 5 + c) as f64);
        let init = CrossInit { p_x: Some(m.clone()), ..Default::default() };
        let (f, r) = init_cross_pair((1, 2), (1, 1), cross_process_noise(&sys, 1, 1), &init).unwrap();
        assert_eq!(f.p_x, m);
        assert_eq!(r.p_x, m.transpose());
        assert!(init_cross((1, 1), (1, 1), cross_process_noise(&sys, 1, 1), &CrossInit::default()).is_err());
        let bad = CrossInit { p_phi: Some(Mat::zeros(2, 2)), ..Default::default() };
        assert!(init_cross((1, 2), (1, 1), cross_process_noise(&sys, 1, 1), &bad).is_err());
    }

    #[test]
    fn zero_noise_zero_init_stays_zero() {
        let (sys, a1, a2) = pair_system(0.0);
        let (mut f, mut r) = init_cross_pair((1, 2), (1, 1), cross_process_noise(&sys, 1, 1), &CrossInit::default()).unwrap();
        let mut l1 = init_local(1, &a1, &LocalInit::default(), 1.0).unwrap();
        let mut l2 = init_local(2, &a2, &LocalInit::default(), 1.0).unwrap();
        for _ in 0..10 {
            let s1 = step_local(&l1, &Vector::zeros(1), &a1).unwrap();
            let s2 = step_local(&l2, &Vector::zeros(1), &a2).unwrap();
            let (nf, nr) = propagate_cross(
                &f,
                &r,
                CrossInput { gains: &s1.gains, aug: &a1 },
                CrossInput { gains: &s2.gains, aug: &a2 },
            );
            for m in [&nf.p_x, &nf.p_phi, &nf.u, &nf.y, &nf.v, &nr.p_x, &nr.u] {
                assert_eq!(m.amax(), 0.0);
            }
            f = nf;
            r = nr;
            l1 = s1.state;
            l2 = s2.state;
        }
    }

    #[test]
    fn transpose_coherence_holds() {
        let (sys, a1, _) = pair_system(1.0);
        // Use different sensor models so the pair is genuinely asymmetric.
        let w2 = SensorSpec::new(2, scalar(2.0), scalar(0.5), Defense::Weak).unwrap();
        let a2 = build_augmented_subsystem(&sys, &build_enhanced_sensor(&w2, &[]).unwrap(), 1).unwrap();
        let (mut f, mut r) = init_cross_pair((1, 2), (1, 1), cross_process_noise(&sys, 1, 1), &CrossInit::default()).unwrap();
        let mut l1 = init_local(1, &a1, &LocalInit::default(), 1.0).unwrap();
        let mut l2 = init_local(2, &a2, &LocalInit::default(), 2.0).unwrap();
        for _ in 0..30 {
            let s1 = step_local(&l1, &Vector::zeros(1), &a1).unwrap();
            let s2 = step_local(&l2, &Vector::zeros(1), &a2).unwrap();
            let (nf, nr) = propagate_cross(
                &f,
                &r,
                CrossInput { gains: &s1.gains, aug: &a1 },
                CrossInput { gains: &s2.gains, aug: &a2 },
            );
            assert!((&nf.p_x - nr.p_x.transpose()).amax() < 1e-9);
            assert!((&nf.p_phi - nr.p_phi.transpose()).amax() < 1e-9);
            assert!((&nf.v - nr.v.transpose()).amax() < 1e-9);
            f = nf;
            r = nr;
            l1 = s1.state;
            l2 = s2.state;
        }
    }
}
