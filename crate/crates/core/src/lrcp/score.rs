//! Projection-residual scoring and top-K selection.

use std::cmp::Ordering;

use ndarray::{Axis, CowArray};

use crate::error::{LrcpError, Result};
use crate::linalg::product::matmul;
use crate::matrix::{Subspace, TokenMatrix};

/// Per-token energies relative to a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenScores {
    /// `s_i = ‖x_i (I − U Uᵀ)‖²`, clamped at zero.
    pub residuals: Vec<f64>,
    /// `‖x_i U‖²`.
    pub projections: Vec<f64>,
}

/// Residual and in-subspace energy of every token, computed as
/// `‖x_i‖² − ‖x_i U‖²` without forming the `D x D` projector.
pub fn token_scores(x: &TokenMatrix, s: &Subspace) -> Result<TokenScores> {
    if s.ambient_dim() != x.dim() {
        return Err(LrcpError::DimensionMismatch {
            expected: x.dim(),
            actual: s.ambient_dim(),
        });
    }
    let work = match s.center() {
        Some(mean) => CowArray::from(x.centered(mean)),
        None => CowArray::from(x.view()),
    };
    let coords = matmul(work.view(), s.basis());
    let projections: Vec<f64> = coords
        .axis_iter(Axis(0))
        .map(|c| c.iter().map(|v| v * v).sum())
        .collect();
    let centered_norms: Vec<f64>;
    let totals = match s.center() {
        None => x.row_sq_norms(),
        Some(_) => {
            centered_norms = work.axis_iter(Axis(0)).map(|row| row.dot(&row)).collect();
            &centered_norms
        }
    };
    let residuals = totals
        .iter()
        .zip(&projections)
        .map(|(&total, &p)| (total - p).max(0.0))
        .collect();
    Ok(TokenScores {
        residuals,
        projections,
    })
}

pub fn projection_residuals(x: &TokenMatrix, s: &Subspace) -> Result<Vec<f64>> {
    token_scores(x, s).map(|t| t.residuals)
}

/// Direction of a top-K selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectOrder {
    /// Keep the `k` largest scores.
    Descending,
    /// Keep the `k` smallest scores.
    Ascending,
}

/// Indices of the `k` best scores, sorted ascending by position.
///
/// Equal scores are broken in favour of the lower index.
pub fn select_top_k(scores: &[f64], k: usize, order: SelectOrder) -> Result<Vec<usize>> {
    let n = scores.len();
    if k == 0 || k > n {
        return Err(LrcpError::BudgetExceedsTokens {
            budget: k,
            n_tokens: n,
        });
    }
    let rank = |a: &usize, b: &usize| -> Ordering {
        let by_score = match order {
            SelectOrder::Descending => scores[*b].total_cmp(&scores[*a]),
            SelectOrder::Ascending => scores[*a].total_cmp(&scores[*b]),
        };
        by_score.then(a.cmp(b))
    };
    let mut indices: Vec<usize> = (0..n).collect();
    if k < n {
        indices.select_nth_unstable_by(k - 1, rank);
        indices.truncate(k);
    }
    indices.sort_unstable();
    Ok(indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn e1(d: usize) -> Subspace {
        let mut b = Array2::zeros((d, 1));
        b[[0, 0]] = 1.0;
        Subspace::new(b, vec![0.0]).unwrap()
    }

    /// Dense oracle: `‖x_i (I − U Uᵀ)‖²` with the projector formed explicitly.
    fn dense_residuals(x: &TokenMatrix, s: &Subspace) -> Vec<f64> {
        let u = s.basis();
        let p = u.dot(&u.t());
        let eye = Array2::<f64>::eye(x.dim());
        let r = x.as_array().dot(&(&eye - &p));
        r.rows().into_iter().map(|row| row.dot(&row)).collect()
    }

    #[test]
    fn hand_computed_residuals() {
        let x = TokenMatrix::new(array![[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]).unwrap();
        let s = e1(2);
        let scores = projection_residuals(&x, &s).unwrap();
        assert_eq!(scores, vec![0.0, 4.0, 1.0]);
        let dense = dense_residuals(&x, &s);
        for (a, b) in scores.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            select_top_k(&scores, 1, SelectOrder::Descending).unwrap(),
            vec![1]
        );
    }

    #[test]
    fn in_and_orthogonal_tokens() {
        let x = TokenMatrix::new(array![[3.0, 0.0, 0.0], [0.0, 2.0, -1.0]]).unwrap();
        let t = token_scores(&x, &e1(3)).unwrap();
        assert!(t.residuals[0].abs() < 1e-10);
        assert!((t.residuals[1] - 5.0).abs() < 1e-12);
        assert_eq!(t.projections, vec![9.0, 0.0]);
    }

    #[test]
    fn centered_subspace_measures_from_mean() {
        let x = TokenMatrix::new(array![[1.0, 5.0], [3.0, 5.0]]).unwrap();
        let s = e1(2).with_center(array![2.0, 5.0]).unwrap();
        let scores = projection_residuals(&x, &s).unwrap();
        assert!(scores.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dimension_mismatch() {
        let x = TokenMatrix::new(array![[1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            projection_residuals(&x, &e1(2)),
            Err(LrcpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn strict_ordering_and_ties() {
        assert_eq!(
            select_top_k(&[5.0, 1.0, 3.0], 2, SelectOrder::Descending).unwrap(),
            vec![0, 2]
        );
        assert_eq!(
            select_top_k(&[2.0; 4], 2, SelectOrder::Descending).unwrap(),
            vec![0, 1]
        );
        assert_eq!(
            select_top_k(&[2.0; 4], 3, SelectOrder::Ascending).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(
            select_top_k(&[5.0, 1.0, 3.0], 1, SelectOrder::Ascending).unwrap(),
            vec![1]
        );
        assert_eq!(
            select_top_k(&[1.0, 2.0], 2, SelectOrder::Descending).unwrap(),
            vec![0, 1]
        );
    }

    #[test]
    fn budget_errors() {
        assert!(matches!(
            select_top_k(&[1.0, 2.0], 3, SelectOrder::Descending),
            Err(LrcpError::BudgetExceedsTokens {
                budget: 3,
                n_tokens: 2
            })
        ));
        assert!(select_top_k(&[1.0], 0, SelectOrder::Descending).is_err());
    }
}
