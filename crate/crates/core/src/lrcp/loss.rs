//! Surrogate compression loss.

use ndarray::Array2;

use super::merge::validate_retained;
use super::score::projection_residuals;
use crate::error::{LrcpError, Result};
use crate::matrix::{Subspace, TokenMatrix};

/// `Σ_{i∉S} scores[i]`, summed in ascending index order.
pub fn discarded_sum(scores: &[f64], retained: &[usize]) -> f64 {
    let mut keep = vec![false; scores.len()];
    for &j in retained {
        if j < keep.len() {
            keep[j] = true;
        }
    }
    scores
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| !k)
        .map(|(s, _)| s)
        .sum()
}

/// Loss of discarding every token outside `retained`: the sum of the
/// discarded tokens' projection residuals.
pub fn surrogate_loss(x: &TokenMatrix, s: &Subspace, retained: &[usize]) -> Result<f64> {
    let retained = validate_retained(retained, x.n_tokens())?;
    let scores = projection_residuals(x, s)?;
    Ok(discarded_sum(&scores, &retained))
}

/// `‖(I − M_S) X (I − P_r)‖_F²` with `P_r = U Uᵀ` materialized.
///
/// Costs `O(N·D²)`; intended as a cross-check at small sizes.
pub fn surrogate_loss_dense(x: &TokenMatrix, s: &Subspace, retained: &[usize]) -> Result<f64> {
    let n = x.n_tokens();
    let d = x.dim();
    if s.ambient_dim() != d {
        return Err(LrcpError::DimensionMismatch {
            expected: d,
            actual: s.ambient_dim(),
        });
    }
    let retained = validate_retained(retained, n)?;
    let work = match s.center() {
        Some(mean) => x.centered(mean),
        None => x.as_array().clone(),
    };
    let u = s.basis();
    let complement = Array2::<f64>::eye(d) - u.dot(&u.t());
    let mut mask = Array2::<f64>::eye(n);
    for &j in &retained {
        mask[[j, j]] = 0.0;
    }
    let residual = mask.dot(&work).dot(&complement);
    Ok(residual.iter().map(|v| v * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd::randomized_truncated_svd;
    use crate::rng::{gaussian_matrix, seeded};
    use ndarray::array;

    #[test]
    fn full_retention_is_lossless() {
        let x = TokenMatrix::new(gaussian_matrix(6, 4, &mut seeded(1))).unwrap();
        let s = randomized_truncated_svd(&x, 2, 0).unwrap();
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(surrogate_loss(&x, &s, &all).unwrap(), 0.0);
        assert!(surrogate_loss_dense(&x, &s, &all).unwrap().abs() < 1e-20);
    }

    #[test]
    fn rank_covering_subspace_is_lossless() {
        // Rank-2 data, rank-2 subspace: every residual vanishes.
        let x = TokenMatrix::new(array![
            [1.0, 2.0, 0.0],
            [2.0, 4.0, 1.0],
            [0.0, 0.0, 1.0],
            [3.0, 6.0, 2.0]
        ])
        .unwrap();
        let s = randomized_truncated_svd(&x, 2, 3).unwrap();
        for retained in [vec![0], vec![1, 3], vec![2]] {
            assert!(surrogate_loss(&x, &s, &retained).unwrap() < 1e-8);
        }
    }

    #[test]
    fn dense_and_separable_forms_agree() {
        let x = TokenMatrix::new(gaussian_matrix(7, 5, &mut seeded(2))).unwrap();
        let s = randomized_truncated_svd(&x, 2, 0).unwrap();
        let a = surrogate_loss(&x, &s, &[1, 4]).unwrap();
        let b = surrogate_loss_dense(&x, &s, &[4, 1]).unwrap();
        assert!((a - b).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn discarded_sum_ignores_retained() {
        assert_eq!(discarded_sum(&[1.0, 2.0, 4.0], &[1]), 5.0);
    }
}
