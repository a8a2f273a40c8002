//! Augmented Kalman filter baseline: the attack increment is treated as
//! process noise of intensity `q_θ` on the attack channel.

use crate::error::{Error, Result};
use crate::linalg::{condition_estimate, symmetrize, Mat, Vector};
use crate::model::AugmentedSubsystem;

#[derive(Debug, Clone, PartialEq)]
pub struct AkfState {
    pub sensor_id: usize,
    pub x_hat: Vector,
    pub p: Mat,
    pub q_theta: f64,
}

impl AkfState {
    pub fn new(sensor_id: usize, x_hat: Vector, p: Mat, q_theta: f64) -> Result<Self> {
        if p.shape() != (x_hat.len(), x_hat.len()) {
            return Err(Error::dim("baseline P", (x_hat.len(), x_hat.len()), p.shape()));
        }
        if !(q_theta >= 0.0 && q_theta.is_finite()) {
            return Err(Error::Config(format!("q_theta must be finite and >= 0, got {q_theta}")));
        }
        Ok(Self { sensor_id, x_hat, p, q_theta })
    }

    /// State part of the estimate.
    pub fn x(&self, n: usize) -> Vector {
        self.x_hat.rows(0, n).into_owned()
    }

    pub fn theta(&self, n: usize) -> Vector {
        self.x_hat.rows(n, self.x_hat.len() - n).into_owned()
    }
}

/// Kalman gain for the step, from the predicted covariance.
pub fn akf_gain(p_pred: &Mat, aug: &AugmentedSubsystem, sensor_id: usize) -> Result<Mat> {
    let c = &aug.c;
    let s = symmetrize(&(c * p_pred * c.transpose() + &aug.r));
    let chol = s
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Estimator { sensor: sensor_id, condition: condition_estimate(&s) })?;
    Ok(chol.solve(&(c * p_pred)).transpose())
}

pub fn akf_predicted_covariance(state: &AkfState, aug: &AugmentedSubsystem) -> Mat {
    &aug.a * &state.p * aug.a.transpose() + &aug.q + &aug.phi * aug.phi.transpose() * state.q_theta
}

pub fn akf_step(state: &AkfState, y: &Vector, aug: &AugmentedSubsystem) -> Result<AkfState> {
    if y.len() != aug.m() {
        return Err(Error::dim("baseline measurement", (aug.m(), 1), (y.len(), 1)));
    }
    let p_pred = akf_predicted_covariance(state, aug);
    let k = akf_gain(&p_pred, aug, state.sensor_id)?;
    let predicted = &aug.a * &state.x_hat;
    let x_hat = &predicted + &k * (y - &aug.c * &predicted);
    // Joseph form
    let i_kc = Mat::identity(aug.n_aug(), aug.n_aug()) - &k * &aug.c;
    let p = &i_kc * p_pred * i_kc.transpose() + &k * &aug.r * k.transpose();
    Ok(AkfState { x_hat, p: symmetrize(&p), ..state.clone() })
}
