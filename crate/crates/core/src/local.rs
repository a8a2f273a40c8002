//! Joint recursive estimation of the augmented state `X_i = [x; θ_i]` and the
//! attack increment `φ_i(k) = θ_i(k) - θ_i(k-1)` for one weak sensor.
//!
//! The estimator has the form
//!
//! ```text
//! X̂(k) = A X̂(k-1) + Φ φ̂(k-1) + K(k) ỹ(k)
//! φ̂(k) = φ̂(k-1) + Γ(k) ỹ(k)
//! ỹ(k) = y(k) - C [A X̂(k-1) + Φ φ̂(k-1)]
//! ```
//!
//! where `A`, `Φ`, `C` are the augmented matrices. The gains minimize the
//! traces of the error covariances `P^X` and `P^φ`. The unknown attack second
//! moment entering those covariances is replaced by `η I` (the compensation
//! factor), so the recursion below is exact only when the attack is white with
//! covariance `η I` and uncorrelated with everything else.
//!
//! A step is: [`compute_xi`] → [`compute_gains`] → [`propagate_covariances`]
//! and [`innovate_and_update`]. Both of the latter read the step-`k-1` state.

use crate::error::{Error, Result};
use crate::linalg::{condition_estimate, symmetrize, Mat, Vector};
use crate::model::AugmentedSubsystem;

/// Optional overrides for the initial estimator state. Unset fields take the
/// defaults `X̂ = 0`, `φ̂ = 0`, `P^X = I`, `P^φ = I`, `U = O`, `V = O`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalInit {
    pub x_hat: Option<Vector>,
    pub phi_hat: Option<Vector>,
    pub p_x: Option<Mat>,
    pub p_phi: Option<Mat>,
    pub u: Option<Mat>,
    pub v: Option<Mat>,
}

impl LocalInit {
    /// Initial values that switch the attack channel off entirely:
    /// `P^φ = U = V = O`.
    pub fn attack_free(n_aug: usize, p: usize) -> Self {
        Self {
            p_phi: Some(Mat::zeros(p, p)),
            u: Some(Mat::zeros(n_aug, p)),
            v: Some(Mat::zeros(p, p)),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalEstimatorState {
    pub sensor_id: usize,
    /// `X̂_i(k)`
    pub x_hat: Vector,
    /// `φ̂_i(k)`
    pub phi_hat: Vector,
    /// `P^X_ii(k)`
    pub p_x: Mat,
    /// `P^φ_ii(k)`
    pub p_phi: Mat,
    /// `U_ii(k) = E{X̃ φ̂ᵀ}`
    pub u: Mat,
    /// `V_ii(k) = E{φ̂ φ̂ᵀ}`
    pub v: Mat,
    /// `K_i(k)`, used as the previous gain at step `k+1`.
    pub k_prev: Mat,
    /// `Γ_i(k)`
    pub gamma_prev: Mat,
    /// `C^a_i(k)`
    pub c_prev: Mat,
    /// Compensation factor applied at the next step.
    pub eta: f64,
    /// Index `k` of the quantities held.
    pub step: usize,
}

impl LocalEstimatorState {
    pub fn n_aug(&self) -> usize {
        self.x_hat.len()
    }

    pub fn p(&self) -> usize {
        self.phi_hat.len()
    }

    /// `I - Γ(k) C(k) Φ` from the stored gain.
    pub fn gamma_a_prev(&self, phi_a: &Mat) -> Mat {
        Mat::identity(self.p(), self.p()) - &self.gamma_prev * &self.c_prev * phi_a
    }

    /// `I - K(k) C(k)` from the stored gain.
    pub fn k_a_prev(&self) -> Mat {
        Mat::identity(self.n_aug(), self.n_aug()) - &self.k_prev * &self.c_prev
    }
}

/// Prediction-covariance terms of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct XiTriple {
    /// `Ξ_i(k)`, the one-step prediction error covariance.
    pub xi: Mat,
    /// `Ξ¹_i(k)`
    pub xi1: Mat,
    /// `Ξ²_i(k)`
    pub xi2: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainPair {
    /// State gain `K_i(k)`, `(n+p) × m`.
    pub k: Mat,
    /// Input gain `Γ_i(k)`, `p × m`.
    pub gamma: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Innovation {
    pub y_tilde: Vector,
}

/// Products of a gain pair with the step's augmented matrices.
#[derive(Debug, Clone)]
pub(crate) struct GainTerms {
    /// `Γ C`
    pub gamma_c: Mat,
    /// `Γ C Φ`
    pub gamma_c_phi: Mat,
    /// `Γ^a = I - Γ C Φ`
    pub gamma_a: Mat,
    /// `Γ^b = Γ C A`
    pub gamma_b: Mat,
    /// `K^a = I - K C`
    pub k_a: Mat,
}

impl GainTerms {
    pub(crate) fn new(g: &GainPair, aug: &AugmentedSubsystem) -> Self {
        let gamma_c = &g.gamma * &aug.c;
        let gamma_c_phi = &gamma_c * &aug.phi;
        let gamma_a = Mat::identity(aug.p, aug.p) - &gamma_c_phi;
        let gamma_b = &gamma_c * &aug.a;
        let k_a = Mat::identity(aug.n_aug(), aug.n_aug()) - &g.k * &aug.c;
        Self { gamma_c, gamma_c_phi, gamma_a, gamma_b, k_a }
    }
}

fn check_shape(what: &str, m: &Mat, shape: (usize, usize)) -> Result<()> {
    if m.shape() != shape {
        return Err(Error::dim(what, shape, m.shape()));
    }
    Ok(())
}

fn check_symmetric(what: &str, m: &Mat) -> Result<()> {
    if (m - m.transpose()).amax() > 1e-10 * m.amax().max(1.0) {
        return Err(Error::Config(format!("{what} is not symmetric")));
    }
    Ok(())
}

/// Builds the step-0 state. Initial gains are zero, so `K^a(0) = I` and
/// `Γ^a(0) = I` in the first recursion.
pub fn init_local(
    sensor_id: usize,
    aug: &AugmentedSubsystem,
    init: &LocalInit,
    eta: f64,
) -> Result<LocalEstimatorState> {
    let na = aug.n_aug();
    let p = aug.p;
    let m = aug.m();
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("sensor {sensor_id}: compensation factor must be finite and >= 0, got {eta}")));
    }
    let x_hat = init.x_hat.clone().unwrap_or_else(|| Vector::zeros(na));
    let phi_hat = init.phi_hat.clone().unwrap_or_else(|| Vector::zeros(p));
    let p_x = init.p_x.clone().unwrap_or_else(|| Mat::identity(na, na));
    let p_phi = init.p_phi.clone().unwrap_or_else(|| Mat::identity(p, p));
    let u = init.u.clone().unwrap_or_else(|| Mat::zeros(na, p));
    let v = init.v.clone().unwrap_or_else(|| Mat::zeros(p, p));

    if x_hat.len() != na {
        return Err(Error::dim("initial X̂", (na, 1), (x_hat.len(), 1)));
    }
    if phi_hat.len() != p {
        return Err(Error::dim("initial φ̂", (p, 1), (phi_hat.len(), 1)));
    }
    check_shape("initial P^X", &p_x, (na, na))?;
    check_shape("initial P^φ", &p_phi, (p, p))?;
    check_shape("initial U", &u, (na, p))?;
    check_shape("initial V", &v, (p, p))?;
    check_symmetric("initial P^X", &p_x)?;
    check_symmetric("initial P^φ", &p_phi)?;
    check_symmetric("initial V", &v)?;

    Ok(LocalEstimatorState {
        sensor_id,
        x_hat,
        phi_hat,
        p_x,
        p_phi,
        u,
        v,
        k_prev: Mat::zeros(na, m),
        gamma_prev: Mat::zeros(p, m),
        c_prev: aug.c.clone(),
        eta,
        step: 0,
    })
}

pub fn compute_xi(state: &LocalEstimatorState, aug: &AugmentedSubsystem) -> XiTriple {
    let eta = state.eta;
    let p = aug.p;
    let a = &aug.a;
    let phi = &aug.phi;
    let gamma_a_prev = state.gamma_a_prev(phi);
    let k_a_prev = state.k_a_prev();

    let xi1 = Mat::identity(p, p) * (6.0 * eta) - &state.p_phi - gamma_a_prev.transpose() * eta - &gamma_a_prev * eta;
    let xi1 = symmetrize(&xi1);
    let xi2 = &state.u + k_a_prev * phi * eta;
    let a_xi2_phit = a * &xi2 * phi.transpose();
    let xi = a * &state.p_x * a.transpose() + &aug.q + phi * &xi1 * phi.transpose()
        - &a_xi2_phit
        - a_xi2_phit.transpose();
    XiTriple { xi: symmetrize(&xi), xi1, xi2 }
}

/// Optimal gains for the step. Fails when the innovation covariance
/// `S = C Ξ Cᵀ + R` is not positive definite.
pub fn compute_gains(state: &LocalEstimatorState, xi: &XiTriple, aug: &AugmentedSubsystem) -> Result<GainPair> {
    let eta = state.eta;
    let a = &aug.a;
    let phi = &aug.phi;
    let c = &aug.c;
    let s = symmetrize(&(c * &xi.xi * c.transpose() + &aug.r));
    let chol = s.clone().cholesky().ok_or_else(|| Error::Estimator {
        sensor: state.sensor_id,
        condition: condition_estimate(&s),
    })?;

    // K = Ξ Cᵀ S⁻¹ = (S⁻¹ C Ξ)ᵀ
    let k = chol.solve(&(c * &xi.xi)).transpose();

    let gamma_a_prev = state.gamma_a_prev(phi);
    let k_a_prev = state.k_a_prev();
    let phit = phi.transpose();
    let bracket = &state.p_phi * &phit
        + state.u.transpose() * a.transpose()
        + &gamma_a_prev * &phit * eta
        + (phi * &gamma_a_prev).transpose() * eta
        + (a * &k_a_prev * phi).transpose() * eta
        - &phit * (6.0 * eta);
    // Γ = -B Cᵀ S⁻¹ = -(S⁻¹ C Bᵀ)ᵀ
    let gamma = -chol.solve(&(c * bracket.transpose())).transpose();

    if k.iter().chain(gamma.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Estimator { sensor: state.sensor_id, condition: condition_estimate(&s) });
    }
    Ok(GainPair { k, gamma })
}

/// `P^φ(k)` as a function of the input gain, all other step-`k` terms fixed.
pub fn phi_covariance(xi: &XiTriple, gamma: &Mat, aug: &AugmentedSubsystem) -> Mat {
    let gamma_c = gamma * &aug.c;
    let gamma_c_phi = &gamma_c * &aug.phi;
    let gamma_a = Mat::identity(aug.p, aug.p) - &gamma_c_phi;
    let gb_xi2 = &gamma_c * &aug.a * &xi.xi2;
    &gamma_a * &xi.xi1 - &xi.xi1 * gamma_c_phi.transpose()
        + gb_xi2.transpose()
        + &gb_xi2
        + gamma * &aug.r * gamma.transpose()
        + &gamma_c * &xi.xi * gamma_c.transpose()
}

/// `P^X(k) = K^a Ξ K^aᵀ + K R Kᵀ` for an arbitrary state gain.
pub fn state_covariance(xi: &XiTriple, k: &Mat, aug: &AugmentedSubsystem) -> Mat {
    let k_a = Mat::identity(aug.n_aug(), aug.n_aug()) - k * &aug.c;
    &k_a * &xi.xi * k_a.transpose() + k * &aug.r * k.transpose()
}

/// The same covariance written before the optimal gain is substituted:
/// `Ξ + K S Kᵀ - Ξ (K C)ᵀ - K C Ξ`.
pub fn state_covariance_expanded(xi: &XiTriple, k: &Mat, aug: &AugmentedSubsystem) -> Mat {
    let c = &aug.c;
    let s = &aug.r + c * &xi.xi * c.transpose();
    let kc_xi = k * c * &xi.xi;
    &xi.xi + k * s * k.transpose() - kc_xi.transpose() - kc_xi
}

/// Estimate update. Stores the step gains for the next recursion.
pub fn innovate_and_update(
    state: &LocalEstimatorState,
    gains: &GainPair,
    y: &Vector,
    aug: &AugmentedSubsystem,
) -> Result<(LocalEstimatorState, Innovation)> {
    if y.len() != aug.m() {
        return Err(Error::dim(format!("measurement of sensor {}", state.sensor_id), (aug.m(), 1), (y.len(), 1)));
    }
    let predicted = &aug.a * &state.x_hat + &aug.phi * &state.phi_hat;
    let y_tilde = y - &aug.c * &predicted;
    let mut next = state.clone();
    next.x_hat = predicted + &gains.k * &y_tilde;
    next.phi_hat = &state.phi_hat + &gains.gamma * &y_tilde;
    next.k_prev = gains.k.clone();
    next.gamma_prev = gains.gamma.clone();
    next.c_prev = aug.c.clone();
    next.step = state.step + 1;
    Ok((next, Innovation { y_tilde }))
}

/// Advances `P^φ`, `P^X`, `U`, `V` from step `k-1` to `k`.
pub fn propagate_covariances(
    state: &LocalEstimatorState,
    gains: &GainPair,
    xi: &XiTriple,
    aug: &AugmentedSubsystem,
) -> LocalEstimatorState {
    let eta = state.eta;
    let a = &aug.a;
    let phi = &aug.phi;
    let r = &aug.r;
    let t = GainTerms::new(gains, aug);
    let prev_gcp = &state.gamma_prev * &state.c_prev * phi;

    let p_phi = phi_covariance(xi, &gains.gamma, aug);
    let p_x = &t.k_a * &xi.xi * t.k_a.transpose() + &gains.k * r * gains.k.transpose();

    let k_r_gt = &gains.k * r * gains.gamma.transpose();
    let u = &t.k_a * (a * &state.u - phi * &state.v)
        - &t.k_a * phi * prev_gcp.transpose() * eta
        - &k_r_gt
        + &t.k_a * &xi.xi * t.gamma_c.transpose();

    let gb_u = &t.gamma_b * &state.u;
    let s = &aug.c * &xi.xi * aug.c.transpose() + r;
    let v = gb_u.transpose() + &gb_u + &state.v * t.gamma_a.transpose()
        - &t.gamma_c_phi * &state.v
        - &prev_gcp * t.gamma_c_phi.transpose() * eta
        - &t.gamma_c_phi * prev_gcp.transpose() * eta
        + &gains.gamma * s * gains.gamma.transpose();

    let mut next = state.clone();
    next.p_phi = symmetrize(&p_phi);
    next.p_x = symmetrize(&p_x);
    next.u = u;
    next.v = symmetrize(&v);
    next.k_prev = gains.k.clone();
    next.gamma_prev = gains.gamma.clone();
    next.c_prev = aug.c.clone();
    next.step = state.step + 1;
    next
}

/// Splits `X̂` into the state estimate (first `n`) and attack estimate (last `p`).
pub fn extract_estimates(state: &LocalEstimatorState) -> (Vector, Vector) {
    let p = state.p();
    let n = state.n_aug() - p;
    (state.x_hat.rows(0, n).into_owned(), state.x_hat.rows(n, p).into_owned())
}

/// Output of one full local step.
#[derive(Debug, Clone)]
pub struct LocalStep {
    pub state: LocalEstimatorState,
    pub gains: GainPair,
    pub xi: XiTriple,
    pub innovation: Innovation,
}

/// Runs one complete step: gains, covariance propagation, estimate update.
pub fn step_local(state: &LocalEstimatorState, y: &Vector, aug: &AugmentedSubsystem) -> Result<LocalStep> {
    let xi = compute_xi(state, aug);
    let gains = compute_gains(state, &xi, aug)?;
    let propagated = propagate_covariances(state, &gains, &xi, aug);
    let (updated, innovation) = innovate_and_update(state, &gains, y, aug)?;
    let mut next = propagated;
    next.x_hat = updated.x_hat;
    next.phi_hat = updated.phi_hat;
    Ok(LocalStep { state: next, gains, xi, innovation })
}
