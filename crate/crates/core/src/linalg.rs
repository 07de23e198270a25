//! Extreme eigenpairs of real symmetric and complex Hermitian matrices.
//!
//! Lanczos with full reorthogonalization; the projected tridiagonal problem
//! is solved by Sturm bisection plus inverse iteration. Small matrices, and
//! larger ones that fail to converge, go to the dense solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::seeded;

const DENSE_BELOW: usize = 64;
const DENSE_FALLBACK_MAX: usize = 512;
const MAX_ITER: usize = 2000;
const REL_TOL: f64 = 1e-8;
const CHECK_EVERY: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
    /// ‖Mv − θv‖.
    pub residual: f64,
    pub iterations: usize,
    pub dense: bool,
}

#[derive(Debug, Clone)]
pub struct ComplexEigenPair {
    pub value: f64,
    pub vector: DVector<Complex64>,
    pub residual: f64,
}

pub fn extreme_eigenpair(m: &DMatrix<f64>, which: Which) -> Result<EigenPair> {
    let n = m.nrows();
    if n != m.ncols() || n == 0 {
        return Err(Error::InvalidParameter("matrix must be square and non-empty".into()));
    }
    if n <= DENSE_BELOW {
        return Ok(dense_pair(m, which));
    }
    match lanczos(m, which) {
        Ok(p) => Ok(p),
        Err(Error::NonConvergence { .. }) if n <= DENSE_FALLBACK_MAX => Ok(dense_pair(m, which)),
        Err(e) => Err(e),
    }
}

/// Extreme eigenpair of a Hermitian matrix via its real embedding
/// `[[A, −B], [B, A]]`.
pub fn extreme_eigenpair_hermitian(h: &DMatrix<Complex64>, which: Which) -> Result<ComplexEigenPair> {
    let n = h.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let p = extreme_eigenpair(&emb, which)?;
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(p.vector[i], p.vector[i + n]));
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    let r = (h * &v - &v * Complex64::new(p.value, 0.0)).norm();
    Ok(ComplexEigenPair {
        value: p.value,
        vector: v,
        residual: r,
    })
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn dense_pair(m: &DMatrix<f64>, which: Which) -> EigenPair {
    let eig = SymmetricEigen::new(m.clone());
    let k = match which {
        Which::Max => eig.eigenvalues.imax(),
        Which::Min => eig.eigenvalues.imin(),
    };
    let value = eig.eigenvalues[k];
    let vector = eig.eigenvectors.column(k).into_owned();
    let residual = (m * &vector - &vector * value).norm();
    EigenPair {
        value,
        vector,
        residual,
        iterations: 0,
        dense: true,
    }
}

fn lanczos(m: &DMatrix<f64>, which: Which) -> Result<EigenPair> {
    let n = m.nrows();
    let mut rng = seeded(0x1a2c_20f3 ^ n as u64);
    let mut q = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    q /= q.norm();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let cap = MAX_ITER.min(n);
    for j in 0..cap {
        let mut w = m * &q;
        let a = q.dot(&w);
        w.axpy(-a, &q, 1.0);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            w.axpy(-b, prev, 1.0);
        }
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w.axpy(-c, v, 1.0);
            }
        }
        let b = w.norm();
        let k = j + 1;
        let exhausted = b <= 1e-14 * alpha.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        if k % CHECK_EVERY == 0 || exhausted || k == cap {
            let (theta, s) = tridiagonal_extreme(&alpha, &beta, which);
            let mut y = DVector::zeros(n);
            for (coef, v) in s.iter().zip(&basis) {
                y.axpy(*coef, v, 1.0);
            }
            y /= y.norm();
            let my = m * &y;
            let rq = y.dot(&my);
            let residual = (&my - &y * rq).norm();
            let scale = rq.abs().max(theta.abs()).max(f64::MIN_POSITIVE);
            if residual <= REL_TOL * scale || exhausted {
                return Ok(EigenPair {
                    value: rq,
                    vector: y,
                    residual,
                    iterations: k,
                    dense: false,
                });
            }
        }
        if exhausted {
            break;
        }
        beta.push(b);
        q = w / b;
    }
    Err(Error::NonConvergence { iterations: cap })
}

/// Number of eigenvalues of the tridiagonal (alpha, beta) below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - off / d;
        if d == 0.0 {
            d = -f64::EPSILON * (1.0 + x.abs());
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Extreme eigenpair of a symmetric tridiagonal matrix.
fn tridiagonal_extreme(alpha: &[f64], beta: &[f64], which: Which) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let below = sturm_count(alpha, &beta[..k - 1], mid);
        let go_right = match which {
            Which::Max => below < k,
            Which::Min => below < 1,
        };
        if go_right {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 4.0 * f64::EPSILON * (a.abs().max(b.abs()) + f64::MIN_POSITIVE) {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    if k == 1 {
        return (theta, vec![1.0]);
    }
    // inverse iteration with a slightly perturbed shift
    let shift = theta
        + match which {
            Which::Max => 1.0,
            Which::Min => -1.0,
        } * 1e-10
            * (hi - lo).max(1e-300);
    let mut s = vec![1.0; k];
    for _ in 0..3 {
        s = solve_shifted_tridiagonal(alpha, &beta[..k - 1], shift, &s);
        let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            s = vec![1.0 / (k as f64).sqrt(); k];
            break;
        }
        s.iter_mut().for_each(|x| *x /= norm);
    }
    (theta, s)
}

/// Solves (T − σI) x = rhs by the Thomas algorithm, nudging zero pivots.
fn solve_shifted_tridiagonal(alpha: &[f64], beta: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let k = alpha.len();
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    let tiny = 1e-300;
    let mut piv = alpha[0] - sigma;
    if piv.abs() < tiny {
        piv = tiny;
    }
    c[0] = if k > 1 { beta[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..k {
        let mut p = alpha[i] - sigma - beta[i - 1] * c[i - 1];
        if p.abs() < tiny {
            p = tiny;
        }
        c[i] = if i + 1 < k { beta[i] / p } else { 0.0 };
        d[i] = (rhs[i] - beta[i - 1] * d[i - 1]) / p;
    }
    let mut x = vec![0.0; k];
    x[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
