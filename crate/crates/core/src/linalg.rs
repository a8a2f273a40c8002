//! Small dense linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Returns `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry of `m - mᵀ`, relative to the largest entry of `m`.
pub fn asymmetry(m: &Mat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

pub fn frobenius(m: &Mat) -> f64 {
    m.norm()
}

/// Ratio of extreme eigenvalue magnitudes of a symmetric matrix.
pub fn condition_estimate(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Cholesky factor of a symmetric positive-definite matrix, or `None`.
pub fn spd_factor(m: &Mat) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(m))
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&Mat]) -> Result<Mat> {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        if b.ncols() != cols {
            return Err(Error::dim("vertical stack", (b.nrows(), cols), b.shape()));
        }
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    Ok(out)
}

/// Numerical rank using singular values above `max(shape) * eps * σ_max`.
pub fn numerical_rank(m: &Mat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    sv.iter().filter(|s| **s > tol).count()
}

/// Draws zero-mean Gaussian vectors with a given (possibly singular) covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSampler {
    factor: Mat,
}

impl GaussianSampler {
    pub fn new(cov: &Mat) -> Result<Self> {
        if !cov.is_square() {
            return Err(Error::dim("gaussian covariance", (cov.nrows(), cov.nrows()), cov.shape()));
        }
        let cov = symmetrize(cov);
        if let Some(ch) = Cholesky::new(cov.clone()) {
            return Ok(Self { factor: ch.l() });
        }
        // Semi-definite: factor through the eigen decomposition.
        let eig = SymmetricEigen::new(cov);
        let tol = 1e-12 * eig.eigenvalues.amax().max(1.0);
        if eig.eigenvalues.iter().any(|v| *v < -tol) {
            return Err(Error::Config("covariance is not positive semidefinite".into()));
        }
        let sqrt = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let factor = &eig.eigenvectors * Mat::from_diagonal(&sqrt);
        Ok(Self { factor })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let z = Vector::from_fn(self.factor.ncols(), |_, _| rng.sample(StandardNormal));
        &self.factor * z
    }
}
