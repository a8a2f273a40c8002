//! Matrix-weighted linear minimum-variance fusion of local state estimates.

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{condition_estimate, spd_factor, symmetrize, Mat, Vector};

const COHERENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    /// `G_i(k)`, one `n × n` weight per local estimator.
    pub g: Vec<Mat>,
    /// Joint error covariance `Σ(k)` of the local state estimates.
    pub sigma: Mat,
    /// Fused error covariance `(Hᵀ Σ⁻¹ H)⁻¹`.
    pub p0: Mat,
    /// Ridge added to `Σ` when the first factorization failed.
    pub regularization: f64,
}

impl FusionWeights {
    /// `‖Σ_i G_i - I‖_max`.
    pub fn normalization_error(&self) -> f64 {
        let n = self.p0.nrows();
        let sum = self.g.iter().fold(Mat::zeros(n, n), |acc, g| acc + g);
        (sum - Mat::identity(n, n)).amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedEstimate {
    pub x0_hat: Vector,
}

/// Top-left `n × n` block of an augmented cross covariance.
pub fn state_block(p_x: &Mat, n: usize) -> Mat {
    p_x.view((0, 0), (n, n)).into_owned()
}

/// Assembles `Σ` from an `r × r` grid of `n × n` blocks and symmetrizes it.
pub fn assemble_sigma(blocks: &[Vec<Mat>]) -> Result<Mat> {
    let r = blocks.len();
    let n = blocks.first().and_then(|row| row.first()).map(|b| b.nrows()).unwrap_or(0);
    let mut sigma = Mat::zeros(n * r, n * r);
    for (i, row) in blocks.iter().enumerate() {
        if row.len() != r {
            return Err(Error::dim("covariance grid row", (r, 1), (row.len(), 1)));
        }
        for (j, b) in row.iter().enumerate() {
            if b.shape() != (n, n) {
                return Err(Error::dim(format!("covariance block ({i}, {j})"), (n, n), b.shape()));
            }
            sigma.view_mut((i * n, j * n), (n, n)).copy_from(b);
        }
    }
    let incoherence = (&sigma - sigma.transpose()).amax();
    if incoherence > COHERENCE_TOL * sigma.amax().max(1.0) {
        warn!("covariance grid not transpose-coherent (max deviation {incoherence:.2e}); symmetrizing");
    }
    Ok(symmetrize(&sigma))
}

/// `G = Σ⁻¹ H (Hᵀ Σ⁻¹ H)⁻¹` with `H = [I; …; I]`.
///
/// If `Σ` cannot be factored, one retry is made with `Σ + λ I`,
/// `λ = 1e-9 · tr(Σ) / (n r)`.
pub fn compute_weights(sigma: &Mat, n: usize) -> Result<FusionWeights> {
    if n == 0 || !sigma.nrows().is_multiple_of(n) || !sigma.is_square() {
        return Err(Error::dim("Σ", (sigma.nrows(), sigma.nrows()), sigma.shape()));
    }
    let r = sigma.nrows() / n;
    let sigma = symmetrize(sigma);

    let mut regularization = 0.0;
    let chol = match spd_factor(&sigma) {
        Some(c) => c,
        None => {
            regularization = 1e-9 * sigma.trace() / (n * r) as f64;
            let ridge = &sigma + Mat::identity(n * r, n * r) * regularization;
            match spd_factor(&ridge) {
                Some(c) if regularization > 0.0 => {
                    warn!("Σ not positive definite; regularized with λ = {regularization:.3e}");
                    c
                }
                _ => return Err(Error::Fusion { condition: condition_estimate(&sigma) }),
            }
        }
    };

    let h = Mat::from_fn(n * r, n, |row, col| if row % n == col { 1.0 } else { 0.0 });
    let sinv_h = chol.solve(&h);
    let info = symmetrize(&(h.transpose() * &sinv_h));
    let info_chol = info.clone().cholesky().ok_or_else(|| Error::Fusion { condition: condition_estimate(&info) })?;
    let p0 = symmetrize(&info_chol.inverse());
    let g_stack = sinv_h * &p0;
    let g = (0..r).map(|i| g_stack.view((i * n, 0), (n, n)).transpose()).collect();
    Ok(FusionWeights { g, sigma, p0, regularization })
}

/// `x̂_0 = Σ_i G_i x̂_i`.
pub fn fuse_states(weights: &FusionWeights, locals: &[Vector]) -> Result<FusedEstimate> {
    if locals.len() != weights.g.len() {
        return Err(Error::dim("local estimate count", (weights.g.len(), 1), (locals.len(), 1)));
    }
    let n = weights.p0.nrows();
    let mut x0 = Vector::zeros(n);
    for (g, x) in weights.g.iter().zip(locals) {
        if x.len() != n {
            return Err(Error::dim("local estimate", (n, 1), (x.len(), 1)));
        }
        x0 += g * x;
    }
    Ok(FusedEstimate { x0_hat: x0 })
}
