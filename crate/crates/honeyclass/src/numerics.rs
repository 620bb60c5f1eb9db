//! Small dense linear-algebra kernels shared by the discriminant and
//! regression classifiers.
//!
//! Everything here is sized for tabular chemometrics work (d = 12,
//! n in the hundreds), so the implementations favour clarity and
//! deterministic, fixed-order summation over raw speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from a flat row-major buffer.
    ///
    /// Panics if the buffer length does not match `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length mismatch");
        debug_assert!(data.iter().all(|v| v.is_finite()), "non-finite entry");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix::from_vec(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// Borrow row `r` as a slice.
    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> f64 {
        let d = self.rows.min(self.cols);
        (0..d).map(|i| self.get(i, i)).sum()
    }

    /// Max absolute entry; a cheap norm for residual bounds.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Kahan-compensated sum; keeps reductions stable and order-reproducible.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Per-column mean of an n×d matrix.
pub fn column_means(rows: &Matrix) -> Vec<f64> {
    let n = rows.rows() as f64;
    (0..rows.cols())
        .map(|j| kahan_sum((0..rows.rows()).map(|i| rows.get(i, j))) / n)
        .collect()
}

/// Unbiased sample covariance (divisor n − 1), symmetrized exactly.
pub fn covariance(rows: &Matrix) -> Result<Matrix> {
    let n = rows.rows();
    if n < 2 {
        return Err(Error::InsufficientRows { needed: 2, got: n });
    }
    let d = rows.cols();
    let means = column_means(rows);
    let mut cov = Matrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let s = kahan_sum(
                (0..n).map(|i| (rows.get(i, a) - means[a]) * (rows.get(i, b) - means[b])),
            ) / (n as f64 - 1.0);
            cov.set(a, b, s);
            cov.set(b, a, s);
        }
    }
    Ok(cov)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CholeskyFactor {
    lower: Matrix,
}

impl CholeskyFactor {
    /// Factorizes `a + ridge·I`; fails if the result is not positive definite.
    pub fn decompose(a: &Matrix, ridge: f64) -> Result<Self> {
        let d = a.rows();
        assert_eq!(d, a.cols(), "matrix must be square");
        let mut l = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let mut s = a.get(i, j);
                if i == j {
                    s += ridge;
                }
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l.set(i, j, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(CholeskyFactor { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// Solves (L Lᵀ) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let y = self.forward_solve(b);
        self.backward_solve(&y)
    }

    /// Solves L y = b.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(b.len(), d);
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower.get(i, k) * y[k];
            }
            y[i] = s / self.lower.get(i, i);
        }
        y
    }

    fn backward_solve(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let mut s = y[i];
            for k in i + 1..d {
                s -= self.lower.get(k, i) * x[k];
            }
            x[i] = s / self.lower.get(i, i);
        }
        x
    }

    /// ln det of the factorized matrix.
    pub fn log_det(&self) -> f64 {
        2.0 * kahan_sum((0..self.dim()).map(|i| self.lower.get(i, i).ln()))
    }
}

/// Solves (A + ridge·I) x = b for symmetric A via Cholesky.
pub fn solve_spd(a: &Matrix, b: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let chol = CholeskyFactor::decompose(a, ridge)?;
    Ok(chol.solve(b))
}

/// Ridge ladder used when factorizing class covariances: start at
/// 1e-6·(trace/d) and escalate tenfold up to 1e-2·(trace/d). Small
/// classes routinely produce singular covariances; the ladder keeps the
/// discriminants defined without distorting well-conditioned fits.
pub fn factor_with_ridge_policy(a: &Matrix) -> Result<(CholeskyFactor, f64)> {
    let d = a.rows() as f64;
    let scale = a.trace() / d;
    if !(scale > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut ridge = 1e-6 * scale;
    let max_ridge = 1e-2 * scale;
    loop {
        match CholeskyFactor::decompose(a, ridge) {
            Ok(chol) => return Ok((chol, ridge)),
            Err(_) if ridge < max_ridge => ridge *= 10.0,
            Err(e) => return Err(e),
        }
    }
}

/// Numerically safe softmax: positive components summing to one.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    debug_assert!(logits.iter().all(|v| v.is_finite()));
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let total = kahan_sum(exps.iter().copied());
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest score; ties go to the lowest index.
///
/// This is the single tie-breaking rule used by every classifier.
pub fn argmax_tie_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
