//! Principal angles between equal-rank subspaces.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::svd::jacobi_svd;
use crate::error::{LrcpError, Result};
use crate::matrix::Subspace;

/// How the cosines of the principal angles are reduced to one similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleAggregate {
    #[default]
    Mean,
    Min,
    Product,
}

/// Cosines of the principal angles between `span(a)` and `span(b)`:
/// the singular values of `AᵀB`, clamped to `[0, 1]`, non-increasing.
pub fn principal_angle_cosines(a: &Subspace, b: &Subspace) -> Result<Vec<f64>> {
    basis_cosines(a.basis(), b.basis())
}

pub(crate) fn basis_cosines(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() {
        return Err(LrcpError::DimensionMismatch {
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    if a.ncols() != b.ncols() {
        return Err(LrcpError::RankMismatch {
            left: a.ncols(),
            right: b.ncols(),
        });
    }
    let cross = a.t().dot(&b);
    let svd = jacobi_svd(cross.view())?;
    Ok(svd
        .singular_values
        .into_iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect())
}

/// Mean cosine of the principal angles; 1 for identical subspaces, 0 for
/// mutually orthogonal ones.
pub fn principal_angle_similarity(a: &Subspace, b: &Subspace) -> Result<f64> {
    principal_angle_similarity_with(a, b, AngleAggregate::Mean)
}

pub fn principal_angle_similarity_with(
    a: &Subspace,
    b: &Subspace,
    aggregate: AngleAggregate,
) -> Result<f64> {
    let cosines = principal_angle_cosines(a, b)?;
    Ok(aggregate_cosines(&cosines, aggregate))
}

pub(crate) fn aggregate_cosines(cosines: &[f64], aggregate: AngleAggregate) -> f64 {
    match aggregate {
        AngleAggregate::Mean => cosines.iter().sum::<f64>() / cosines.len() as f64,
        AngleAggregate::Min => cosines.iter().cloned().fold(1.0, f64::min),
        AngleAggregate::Product => cosines.iter().product(),
    }
}
