//! Small dense helpers on top of nalgebra: sorted Hermitian eigenproblems with a
//! deterministic gauge, unitary eigenphases, polar projection.

use nalgebra::{Schur, SymmetricEigen};

use crate::{CMatrix, CVector, Error, Result, C64};

const EIGEN_MAX_ITER: usize = 10_000;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of `U†U − 1`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// Frobenius norm of `M − M†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// Eigenvalues in ascending order with the matching eigenvector columns.
///
/// `k` is only used to label a non-convergence error.
pub fn hermitian_eigen(m: &CMatrix, k: f64) -> Result<(Vec<f64>, CMatrix)> {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolver { k })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok((values, vectors))
}

/// Like [`hermitian_eigen`] but with a reproducible gauge.
///
/// Eigenvalues closer than `cluster_tol` are grouped; each group's subspace gets
/// the basis obtained by pivoted Gram–Schmidt of the canonical unit vectors
/// projected into it. Every vector is then rephased so that its first entry of
/// largest modulus is real and positive.
pub fn canonical_hermitian_eigen(
    m: &CMatrix,
    k: f64,
    cluster_tol: f64,
) -> Result<(Vec<f64>, CMatrix)> {
    let (values, mut vectors) = hermitian_eigen(m, k)?;
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let canon = canonical_subspace_basis(&block);
            vectors.columns_mut(start, end - start).copy_from(&canon);
        }
        start = end;
    }
    for mut col in vectors.column_iter_mut() {
        let phase = gauge_phase(col.as_slice());
        for z in col.iter_mut() {
            *z *= phase;
        }
    }
    Ok((values, vectors))
}

/// Unit phase that makes the first entry of largest modulus real positive.
fn gauge_phase(v: &[C64]) -> C64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-10))
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    pivot.conj() / pivot.norm()
}

/// Orthonormal basis of span(block) that depends only on the subspace.
fn canonical_subspace_basis(block: &CMatrix) -> CMatrix {
    let n = block.nrows();
    let d = block.ncols();
    let proj = block * block.adjoint();
    let mut chosen: Vec<CVector> = Vec::with_capacity(d);
    let mut used = vec![false; n];
    for _ in 0..d {
        let residuals: Vec<Option<CVector>> = (0..n)
            .map(|i| {
                if used[i] {
                    return None;
                }
                let mut w = proj.column(i).into_owned();
                for c in &chosen {
                    let overlap = c.dotc(&w);
                    w -= c * overlap;
                }
                Some(w)
            })
            .collect();
        let best = residuals
            .iter()
            .map(|w| w.as_ref().map_or(0.0, |w| w.norm()))
            .fold(0.0, f64::max);
        let pick = residuals
            .iter()
            .position(|w| w.as_ref().is_some_and(|w| w.norm() >= best * (1.0 - 1e-10)))
            .expect("projector of rank d has d independent columns");
        used[pick] = true;
        let w = residuals[pick].clone().unwrap();
        let norm = w.norm();
        chosen.push(w / C64::new(norm, 0.0));
    }
    CMatrix::from_columns(&chosen)
}

/// Unitary factor of the polar decomposition `A = U·|A|`.
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    u * v_t
}

/// Eigen-decomposition of a unitary (more generally, normal) matrix via the
/// complex Schur form. Returns eigenvalues and orthonormal eigenvectors.
pub fn unitary_eigen(u: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    // The QR iteration can stall at machine precision on clustered spectra.
    let schur = [f64::EPSILON, 1e-14, 1e-12]
        .into_iter()
        .find_map(|eps| Schur::try_new(u.clone(), eps, EIGEN_MAX_ITER))
        .ok_or_else(|| Error::numerical("Schur decomposition of unitary did not converge"))?;
    let (q, t) = schur.unpack();
    let values = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    Ok((values, q))
}

/// `Q · diag(e^{i·scale·φ_j}) · Q†`.
pub fn phase_exponential(q: &CMatrix, phases: &[f64], scale: f64) -> CMatrix {
    let mut scaled = q.clone();
    for (j, &phi) in phases.iter().enumerate() {
        let z = C64::from_polar(1.0, scale * phi);
        for entry in scaled.column_mut(j).iter_mut() {
            *entry *= z;
        }
    }
    scaled * q.adjoint()
}

/// Complex-conjugate every entry.
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Build a matrix from rows of `(re, im)` pairs; panics on ragged input.
pub fn cmatrix(rows: &[&[(f64, f64)]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| {
        let (re, im) = rows[i][j];
        C64::new(re, im)
    })
}

/// Real matrix promoted to complex, row-major input.
pub fn real_matrix(n: usize, m: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(
        n,
        m,
        &data.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
    )
}

pub fn pauli_x() -> CMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    cmatrix(&[&[(0.0, 0.0), (0.0, -1.0)], &[(0.0, 1.0), (0.0, 0.0)]])
}

pub fn pauli_z() -> CMatrix {
    real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = CMatrix::zeros(n, m);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let h = real_matrix(2, 2, &[2.0, 0.0, 0.0, -3.0]);
        let (e, v) = canonical_hermitian_eigen(&h, 0.0, 1e-8).unwrap();
        assert_eq!(e, vec![-3.0, 2.0]);
        assert_relative_eq!(v[(1, 0)].re, 1.0);
        assert_relative_eq!(v[(0, 1)].re, 1.0);
    }

    #[test]
    fn gauge_fixes_first_largest_entry() {
        let (e, v) = canonical_hermitian_eigen(&pauli_x(), 0.0, 1e-8).unwrap();
        assert_relative_eq!(e[0], -1.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(v[(0, 0)].re, s, epsilon = 1e-14);
        assert_relative_eq!(v[(1, 0)].re, -s, epsilon = 1e-14);
        assert!(v[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn degenerate_cluster_is_basis_independent() {
        // Identity rotated by a random unitary is still the identity; the
        // canonical basis must come out as the standard one.
        let h = identity(3);
        let (_, v) = canonical_hermitian_eigen(&h, 0.0, 1e-8).unwrap();
        assert!((v - identity(3)).norm() < 1e-12);
    }

    #[test]
    fn polar_of_unitary_is_itself() {
        let u = pauli_y();
        assert!((polar_unitary(&u) - &u).norm() < 1e-14);
    }

    #[test]
    fn unitary_eigen_reconstructs() {
        let u = real_matrix(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let (vals, q) = unitary_eigen(&u).unwrap();
        let d = CMatrix::from_diagonal(&CVector::from_vec(vals));
        assert!((&q * d * q.adjoint() - u).norm() < 1e-12);
    }
}
