use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Orthonormal basis (columns) of `{x : B x = 0}` for a `k x n` matrix `B`,
/// from the QR factorization of `[B^T | I]`.
pub fn null_space_basis(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (k, n) = b.shape();
    if k == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    if k >= n {
        return Err(Error::RankDeficient);
    }
    let mut aug = DMatrix::zeros(n, k + n);
    aug.view_mut((0, 0), (n, k)).copy_from(&b.transpose());
    aug.view_mut((0, k), (n, n)).fill_with_identity();
    let qr = aug.qr();
    let r = qr.r();
    let scale = b.norm().max(f64::MIN_POSITIVE);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-12 * scale) {
        return Err(Error::RankDeficient);
    }
    let q = qr.q();
    Ok(q.columns(k, n - k).into_owned())
}

/// Eigenvalues (ascending) of `A x = lambda M x` restricted to `B x = 0`.
///
/// `M` must be positive definite on the constrained subspace; otherwise
/// `NotPositiveDefinite` is returned.
pub fn constrained_generalized_eigenvalues(
    a: &DMatrix<f64>,
    m: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let z = null_space_basis(b)?;
    let ap = symmetrize(z.transpose() * a * &z);
    let mp = symmetrize(z.transpose() * m * &z);
    let chol = mp.cholesky().ok_or(Error::NotPositiveDefinite { row: 0, pivot: f64::NAN })?;
    let l = chol.l();
    // C = L^-1 Ap L^-T
    let left = l
        .solve_lower_triangular(&ap)
        .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let c = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let mut ev: Vec<f64> = symmetrize(c).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_is_orthonormal_and_annihilated() {
        let b = DMatrix::from_row_slice(2, 5, &[1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        let z = null_space_basis(&b).unwrap();
        assert_eq!(z.shape(), (5, 3));
        assert!((&b * &z).norm() < 1e-14);
        assert!((z.transpose() * &z - DMatrix::<f64>::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_constraints() {
        let b = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        assert!(matches!(null_space_basis(&b), Err(Error::RankDeficient)));
    }

    #[test]
    fn constrained_diagonal_pencil() {
        // A = diag(1, 2, 3), M = I, constraint x0 = 0 -> eigenvalues {2, 3}
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let m = DMatrix::identity(3, 3);
        let b = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let ev = constrained_generalized_eigenvalues(&a, &m, &b).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        // no constraint, M = 2I
        let ev = constrained_generalized_eigenvalues(&a, &(m * 2.0), &DMatrix::zeros(0, 3)).unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-14);
    }
}
