use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const MAX_ITER: usize = 100_000;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `max |A^T S A + I - S|`.
pub fn lyapunov_residual(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    max_abs(&(a.transpose() * sigma * a + DMatrix::identity(n, n) - sigma))
}

/// Solves `S = A^T S A + I` by the fixed-point iteration `S <- A^T S A + I`
/// from `S = I`.
pub fn solve_lyapunov(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::Config(format!(
            "Lyapunov equation needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let mut sigma = id.clone();
    for _ in 0..MAX_ITER {
        let next = &at * &sigma * a + &id;
        let step = max_abs(&(&next - &sigma));
        sigma = next;
        if !step.is_finite() || max_abs(&sigma) > 1e15 {
            break;
        }
        if step <= 1e-15 * max_abs(&sigma) {
            // symmetrize away rounding drift
            let sym = (&sigma + sigma.transpose()) * 0.5;
            return Ok(sym);
        }
    }
    Err(Error::NonConvergence(
        "Lyapunov iteration diverged; the spectral radius of A must be below 1".into(),
    ))
}

/// Symmetric `M` with `M S M = I`, via the eigendecomposition of `S`.
pub fn sym_inv_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new(sigma.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if eig.eigenvalues.iter().any(|&d| !(d > 1e-14 * scale) || !d.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    let m = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok((&m + m.transpose()) * 0.5)
}
