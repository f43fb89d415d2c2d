//! Natural cubic smoothing spline with the smoothing parameter chosen by
//! effective degrees of freedom.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance on the smoother-matrix trace when matching a target df.
pub const DF_TOLERANCE: f64 = 1e-9;

fn check_knots(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Spline(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 4 {
        return Err(Error::Spline(format!("need at least 4 knots, got {}", xs.len())));
    }
    if !xs.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Spline("abscissae must be strictly increasing".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Spline("non-finite input".into()));
    }
    Ok(())
}

/// The banded pieces of the roughness penalty: `Q` (n x (n-2)) and the
/// tridiagonal `R` ((n-2) x (n-2)), with penalty matrix `K = Q R^-1 Q^T`.
fn q_and_r(xs: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut q = DMatrix::zeros(n, n - 2);
    let mut r = DMatrix::zeros(n - 2, n - 2);
    for j in 0..n - 2 {
        q[(j, j)] = 1.0 / h[j];
        q[(j + 1, j)] = -1.0 / h[j] - 1.0 / h[j + 1];
        q[(j + 2, j)] = 1.0 / h[j + 1];
        r[(j, j)] = (h[j] + h[j + 1]) / 3.0;
        if j + 1 < n - 2 {
            r[(j, j + 1)] = h[j + 1] / 6.0;
            r[(j + 1, j)] = h[j + 1] / 6.0;
        }
    }
    (q, r)
}

/// Penalty matrix `K` with `g^T K g` equal to the integrated squared second
/// derivative of the natural cubic interpolant of `g` at knots `xs`.
pub fn penalty_matrix(xs: &[f64]) -> Result<DMatrix<f64>> {
    check_knots(xs, xs)?;
    let (q, r) = q_and_r(xs);
    let rinv_qt = r
        .lu()
        .solve(&q.transpose())
        .ok_or_else(|| Error::Spline("singular penalty band matrix".into()))?;
    let k = &q * rinv_qt;
    Ok((&k + k.transpose()) * 0.5)
}

struct Eigen {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl Eigen {
    fn trace(&self, lambda: f64) -> f64 {
        self.values.iter().map(|d| 1.0 / (1.0 + lambda * d.max(0.0))).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SmoothingSpline {
    xs: Vec<f64>,
    fitted: Vec<f64>,
    /// second derivatives at the knots, zero at both ends
    gamma: Vec<f64>,
    lambda: f64,
    df: f64,
}

impl SmoothingSpline {
    /// Fit minimising `sum (y_i - f(x_i))^2 + lambda * int f''^2`, with lambda
    /// found by bisection on `log(lambda)` so that the smoother trace equals
    /// `target_df`.
    pub fn fit(xs: &[f64], ys: &[f64], target_df: f64) -> Result<Self> {
        check_knots(xs, ys)?;
        let n = xs.len() as f64;
        if !(target_df > 2.0 && target_df < n) {
            return Err(Error::Spline(format!(
                "target df {target_df} outside (2, {n})"
            )));
        }
        let eig = Self::eigen(xs)?;
        // trace decreases from n at lambda = 0 to 2 as lambda grows
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        let (t_lo, t_hi) = (eig.trace(lo.exp()), eig.trace(hi.exp()));
        if !(t_lo > target_df && t_hi < target_df) {
            return Err(Error::Spline(format!(
                "df {target_df} not bracketed: trace ranges over [{t_hi}, {t_lo}]"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eig.trace(mid.exp()) > target_df {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        let lambda = (0.5 * (lo + hi)).exp();
        let df = eig.trace(lambda);
        if (df - target_df).abs() > DF_TOLERANCE {
            return Err(Error::Spline(format!(
                "bisection stalled at df {df} for target {target_df}"
            )));
        }
        Self::from_eigen(xs, ys, &eig, lambda)
    }

    /// Fit with a fixed smoothing parameter.
    pub fn fit_with_lambda(xs: &[f64], ys: &[f64], lambda: f64) -> Result<Self> {
        check_knots(xs, ys)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Spline(format!("invalid smoothing parameter {lambda}")));
        }
        let eig = Self::eigen(xs)?;
        Self::from_eigen(xs, ys, &eig, lambda)
    }

    fn eigen(xs: &[f64]) -> Result<Eigen> {
        let se = SymmetricEigen::new(penalty_matrix(xs)?);
        Ok(Eigen {
            vectors: se.eigenvectors,
            values: se.eigenvalues,
        })
    }

    fn from_eigen(xs: &[f64], ys: &[f64], eig: &Eigen, lambda: f64) -> Result<Self> {
        let y = DVector::from_column_slice(ys);
        let mut coef = eig.vectors.transpose() * y;
        for (c, d) in coef.iter_mut().zip(eig.values.iter()) {
            *c /= 1.0 + lambda * d.max(0.0);
        }
        let g = &eig.vectors * coef;
        let (q, r) = q_and_r(xs);
        let inner = r
            .lu()
            .solve(&(q.transpose() * &g))
            .ok_or_else(|| Error::Spline("singular penalty band matrix".into()))?;
        let mut gamma = vec![0.0; xs.len()];
        gamma[1..xs.len() - 1].copy_from_slice(inner.as_slice());
        Ok(SmoothingSpline {
            xs: xs.to_vec(),
            fitted: g.as_slice().to_vec(),
            gamma,
            lambda,
            df: eig.trace(lambda),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Trace of the smoother matrix at the chosen lambda.
    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    /// Evaluates the spline; linear beyond the boundary knots.
    pub fn eval(&self, x: f64) -> f64 {
        let (xs, g, c) = (&self.xs, &self.fitted, &self.gamma);
        let n = xs.len();
        if x <= xs[0] {
            let h = xs[1] - xs[0];
            let slope = (g[1] - g[0]) / h - h * (2.0 * c[0] + c[1]) / 6.0;
            return g[0] + slope * (x - xs[0]);
        }
        if x >= xs[n - 1] {
            let h = xs[n - 1] - xs[n - 2];
            let slope = (g[n - 1] - g[n - 2]) / h + h * (c[n - 2] + 2.0 * c[n - 1]) / 6.0;
            return g[n - 1] + slope * (x - xs[n - 1]);
        }
        let i = xs.partition_point(|&k| k <= x) - 1;
        let h = xs[i + 1] - xs[i];
        let (a, b) = (x - xs[i], xs[i + 1] - x);
        (a * g[i + 1] + b * g[i]) / h
            - a * b / 6.0 * ((1.0 + a / h) * c[i + 1] + (1.0 + b / h) * c[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..96).map(|i| i as f64 / 100.0).collect()
    }

    #[test]
    fn constant_and_affine_data_are_reproduced() {
        let xs = grid();
        let c = vec![0.7; xs.len()];
        let s = SmoothingSpline::fit(&xs, &c, 3.0).unwrap();
        assert!((s.eval(1.0) - 0.7).abs() < 1e-10);
        let lin: Vec<f64> = xs.iter().map(|x| 1.2 - 0.4 * x).collect();
        let s = SmoothingSpline::fit(&xs, &lin, 3.0).unwrap();
        assert!((s.eval(1.0) - 0.8).abs() < 1e-10);
        assert!((s.eval(0.333) - (1.2 - 0.4 * 0.333)).abs() < 1e-10);
    }

    #[test]
    fn trace_matches_target() {
        let xs = grid();
        let ys: Vec<f64> = xs.iter().map(|x| (5.0 * x).sin()).collect();
        for df in [2.5, 3.0, 10.0] {
            let s = SmoothingSpline::fit(&xs, &ys, df).unwrap();
            assert!((s.df() - df).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_lambda_interpolates_and_matches_the_penalty() {
        let xs = [0.0, 0.3, 0.5, 0.9, 1.4];
        let ys = [1.0, -1.0, 2.0, 0.5, 0.0];
        let s = SmoothingSpline::fit_with_lambda(&xs, &ys, 0.0).unwrap();
        for (f, y) in s.fitted().iter().zip(ys) {
            assert!((f - y).abs() < 1e-10);
        }
        for (x, y) in xs.iter().zip(ys) {
            assert!((s.eval(*x) - y).abs() < 1e-10);
        }
        // g^T K g against int f''^2 by Simpson on each piece; f'' is linear
        let k = penalty_matrix(&xs).unwrap();
        let g = DVector::from_column_slice(&ys);
        let quad = (g.transpose() * &k * &g)[(0, 0)];
        let eps = 1e-4;
        let second = |x: f64| (s.eval(x + eps) - 2.0 * s.eval(x) + s.eval(x - eps)) / (eps * eps);
        let mut integral = 0.0;
        for w in xs.windows(2) {
            let (a, b) = (w[0] + 2.0 * eps, w[1] - 2.0 * eps);
            let m = 0.5 * (a + b);
            integral += (b - a) / 6.0 * (second(a).powi(2) + 4.0 * second(m).powi(2) + second(b).powi(2));
        }
        assert!((quad - integral).abs() / quad < 1e-2, "{quad} vs {integral}");
    }

    #[test]
    fn bad_inputs() {
        assert!(SmoothingSpline::fit(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], 2.5).is_err());
        assert!(SmoothingSpline::fit(&grid(), &grid(), 2.0).is_err());
        assert!(SmoothingSpline::fit(&grid(), &grid(), 96.0).is_err());
        assert!(SmoothingSpline::fit(&[0.0, 2.0, 1.0, 3.0], &[1.0; 4], 3.0).is_err());
    }
}
