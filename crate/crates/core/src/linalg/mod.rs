//! Sparse and dense linear algebra used by the solvers.

mod cg;
mod cholesky;
mod dense;
mod lanczos;
mod sparse;

pub use cg::conjugate_gradient;
pub use cholesky::{reverse_cuthill_mckee, SparseCholesky};
pub use dense::{constrained_generalized_eigenvalues, null_space_basis};
pub use lanczos::smallest_constrained_eigenvalue;
pub use sparse::{CsrMatrix, TripletBuilder};

use crate::error::{Error, Result};

/// Systems with at least this many unknowns go to preconditioned CG.
pub const DIRECT_SOLVE_LIMIT: usize = 200_000;

/// Relative residual accepted from any SPD solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// Solves `a x = b` for symmetric positive definite `a`.
///
/// Sparse Cholesky below [`DIRECT_SOLVE_LIMIT`] unknowns, Jacobi-preconditioned
/// CG (relative tolerance `1e-12`) above. The relative residual is checked
/// against [`SOLVE_RESIDUAL_TOL`] either way.
pub fn solve_spd(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    solve_spd_with_limit(a, b, DIRECT_SOLVE_LIMIT)
}

pub(crate) fn solve_spd_with_limit(a: &CsrMatrix, b: &[f64], direct_limit: usize) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let x = if a.nrows() < direct_limit {
        SparseCholesky::factor(a)?.solve(b)
    } else {
        conjugate_gradient(a, b, 1e-12, 10 * a.nrows().max(100))?
    };
    let residual = relative_residual(a, &x, b);
    if residual > SOLVE_RESIDUAL_TOL {
        return Err(Error::NotConverged { residual });
    }
    Ok(x)
}

/// `|b - a x| / |b|` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let nb = norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.add(i, i, 2.0);
            if i + 1 < n {
                t.add(i, i + 1, -1.0);
                t.add(i + 1, i, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn direct_and_iterative_agree() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let x1 = solve_spd(&a, &b).unwrap();
        let x2 = solve_spd_with_limit(&a, &b, 0).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-9);
        }
        assert!(relative_residual(&a, &x1, &b) < 1e-13);
    }

    #[test]
    fn empty_system() {
        let a = TripletBuilder::new(0, 0).build();
        assert!(solve_spd(&a, &[]).unwrap().is_empty());
    }
}
