//! Gram-Schmidt orthonormalization.

use ndarray::{Array2, ArrayView2};

use crate::error::{LrcpError, Result};

/// A column whose norm after projection falls below this fraction of its
/// original norm is treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt, two passes).
///
/// Fails with [`LrcpError::RankDeficient`] when any column is numerically
/// dependent on the preceding ones.
pub fn qr_orthonormalize(m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let required = m.ncols();
    let q = orthonormal_columns(m);
    if q.ncols() < required {
        return Err(LrcpError::RankDeficient {
            found: q.ncols(),
            required,
        });
    }
    Ok(q)
}

/// Like [`qr_orthonormalize`], but silently drops dependent columns.
pub(crate) fn orthonormal_columns(m: ArrayView2<'_, f64>) -> Array2<f64> {
    let rows = m.nrows();
    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(m.ncols());
    for col in m.columns() {
        let mut v = col.to_vec();
        if let Some(u) = orthogonalize_against(&mut v, &accepted) {
            accepted.push(u);
        }
    }
    columns_to_array(rows, &accepted)
}

/// Appends unit vectors orthogonal to the columns of `q` until it has
/// `target` columns. Candidates are the coordinate axes in order, so the
/// completion is deterministic.
pub(crate) fn complete_basis(q: Array2<f64>, target: usize) -> Array2<f64> {
    let rows = q.nrows();
    if q.ncols() >= target {
        return q;
    }
    assert!(
        target <= rows,
        "cannot complete {target} columns in dimension {rows}"
    );
    let mut cols: Vec<Vec<f64>> = q.columns().into_iter().map(|c| c.to_vec()).collect();
    for axis in 0..rows {
        if cols.len() == target {
            break;
        }
        let mut v = vec![0.0; rows];
        v[axis] = 1.0;
        // Axes nearly inside the current span are skipped.
        if let Some(u) = orthogonalize_with_tol(&mut v, &cols, 1e-6) {
            cols.push(u);
        }
    }
    columns_to_array(rows, &cols)
}

fn orthogonalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    orthogonalize_with_tol(v, basis, RANK_TOL)
}

fn orthogonalize_with_tol(v: &mut [f64], basis: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let original = norm(v);
    if original == 0.0 || !original.is_finite() {
        return None;
    }
    for _ in 0..2 {
        for u in basis {
            let proj = dot(v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= proj * b);
        }
    }
    let remaining = norm(v);
    if remaining <= tol * original {
        return None;
    }
    Some(v.iter().map(|a| a / remaining).collect())
}

fn columns_to_array(rows: usize, cols: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols.len()), |(i, j)| cols[j][i])
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Independent accumulators let the adds pipeline.
    let mut acc = [0.0f64; 4];
    let (a4, b4) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = a4
        .remainder()
        .iter()
        .zip(b4.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in a4.zip(b4) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `‖a‖_F²` of any 2-D view.
pub(crate) fn sum_of_squares(a: &ndarray::ArrayView2<'_, f64>) -> f64 {
    match a.as_slice_memory_order() {
        Some(s) => dot(s, s),
        None => a.rows().into_iter().map(|r| r.dot(&r)).sum(),
    }
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::orthonormality_error;
    use crate::rng::{gaussian_matrix, seeded};
    use ndarray::array;

    #[test]
    fn identity_columns_unchanged() {
        let m = Array2::from_shape_fn((4, 2), |(i, j)| if i == j { 1.0 } else { 0.0 });
        let q = qr_orthonormalize(m.view()).unwrap();
        assert_eq!(q, m);
    }

    #[test]
    fn axis_aligned_scaling() {
        let m = array![[2.0, 0.0], [0.0, 0.0], [0.0, 3.0]];
        let q = qr_orthonormalize(m.view()).unwrap();
        let expected = array![[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]];
        for j in 0..2 {
            let sign = q[[0, j]] + q[[2, j]];
            let sign = sign.signum();
            for i in 0..3 {
                assert!((sign * q[[i, j]] - expected[[i, j]]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_gram_identity() {
        let mut rng = seeded(7);
        let m = gaussian_matrix(6, 3, &mut rng);
        let q = qr_orthonormalize(m.view()).unwrap();
        assert!(orthonormality_error(&q.view()) < 1e-10);
        // Same span: projecting the input onto q reproduces it.
        let back = q.dot(&q.t().dot(&m));
        assert!((&back - &m).iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn dependent_column_rejected() {
        let m = array![[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]];
        let err = qr_orthonormalize(m.view()).unwrap_err();
        assert!(matches!(
            err,
            LrcpError::RankDeficient {
                found: 1,
                required: 2
            }
        ));
        let zero = Array2::<f64>::zeros((3, 1));
        assert!(qr_orthonormalize(zero.view()).is_err());
    }

    #[test]
    fn completion_fills_orthonormal_columns() {
        let q = array![[1.0], [0.0], [0.0]];
        let full = complete_basis(q, 3);
        assert_eq!(full.ncols(), 3);
        assert!(orthonormality_error(&full.view()) < 1e-12);
    }
}
