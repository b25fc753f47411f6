use nalgebra::{DMatrix, SymmetricEigen};

use super::{dot, CsrMatrix, SparseCholesky};
use crate::error::{Error, Result};

/// Smallest eigenvalue of `A x = lambda M x` on `{x : B x = 0}`.
///
/// Shift-invert Lanczos: the operator `T x = y` with
/// `(A + shift M) y + B^T z = M x`, `B y = 0` is self-adjoint in the `M`
/// inner product and has eigenvalues `1 / (lambda + shift)` on the
/// constrained space. Lanczos runs with full reorthogonalization. Its
/// largest Ritz value never exceeds the true one, so the returned value
/// never undershoots the discrete `lambda_min`.
pub fn smallest_constrained_eigenvalue(
    a: &CsrMatrix,
    m: &CsrMatrix,
    constraints: &[Vec<f64>],
    shift: f64,
) -> Result<f64> {
    let n = a.nrows();
    let k = constraints.len();
    if n <= k {
        return Err(Error::RankDeficient);
    }
    let chol = SparseCholesky::factor(&a.linear_combination(1.0, m, shift))?;

    let w: Vec<Vec<f64>> = constraints.iter().map(|row| chol.solve(row)).collect();
    let s = DMatrix::from_fn(k, k, |i, j| dot(&constraints[i], &w[j]));
    let s_chol = if k > 0 {
        Some(s.cholesky().ok_or(Error::RankDeficient)?)
    } else {
        None
    };

    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = chol.solve(&m.mul_vec(x));
        if let Some(sc) = &s_chol {
            let rhs = nalgebra::DVector::from_iterator(k, constraints.iter().map(|row| dot(row, &y)));
            let z = sc.solve(&rhs);
            for (wj, zj) in w.iter().zip(z.iter()) {
                for (yi, wi) in y.iter_mut().zip(wj) {
                    *yi -= zj * wi;
                }
            }
        }
        y
    };
    let m_dot = |u: &[f64], v: &[f64]| dot(u, &m.mul_vec(v));

    let max_steps = (n - k).min(300);
    let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()).collect();
    let mut v = apply(&start);
    let nv = m_dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for j in 0..max_steps {
        let mut wv = apply(&basis[j]);
        let alpha = m_dot(&wv, &basis[j]);
        alphas.push(alpha);
        for _ in 0..2 {
            for q in &basis {
                let c = m_dot(&wv, q);
                for (x, y) in wv.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let beta = m_dot(&wv, &wv).sqrt();

        let size = alphas.len();
        let t = DMatrix::from_fn(size, size, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c || c + 1 == r {
                betas[r.min(c)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imax, &tmax) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        theta = tmax;
        let last = eig.eigenvectors[(size - 1, imax)].abs();
        if beta * last <= 1e-14 * theta || beta <= 1e-14 * theta {
            break;
        }
        betas.push(beta);
        wv.iter_mut().for_each(|x| *x /= beta);
        basis.push(wv);
    }
    if !(theta > 0.0) {
        return Err(Error::NotConverged { residual: f64::NAN });
    }
    Ok(1.0 / theta - shift)
}
