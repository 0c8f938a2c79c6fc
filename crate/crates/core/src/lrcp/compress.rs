use std::collections::BTreeMap;

use super::config::{CompressionConfig, Scoring};
use super::loss::discarded_sum;
use super::merge::merge_tokens;
use super::score::{select_top_k, token_scores, SelectOrder};
use super::subspace::build_subspace;
use crate::error::Result;
use crate::matrix::{Subspace, TokenMatrix};

/// Outcome of one compression pass.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult {
    /// Distinct, ascending.
    pub retained_indices: Vec<usize>,
    /// Projection residual of every input token.
    pub scores: Vec<f64>,
    /// `K x D` merged (or plainly selected) tokens.
    pub output: TokenMatrix,
    pub surrogate_loss: f64,
    /// Discarded index -> retained index. Populated whether or not merging
    /// was applied to the output features.
    pub assignments: BTreeMap<usize, usize>,
    pub subspace: Subspace,
}

impl CompressionResult {
    pub fn discarded_indices(&self) -> Vec<usize> {
        self.assignments.keys().copied().collect()
    }
}

/// Subspace estimation, scoring, top-K selection and (optionally) merging.
pub fn compress(x: &TokenMatrix, cfg: &CompressionConfig) -> Result<CompressionResult> {
    cfg.validate(x.n_tokens(), x.dim())?;
    let subspace = build_subspace(x, cfg)?;
    let scores = token_scores(x, &subspace)?;

    let retained = match cfg.scoring {
        Scoring::ResidualDescending => {
            select_top_k(&scores.residuals, cfg.budget, SelectOrder::Descending)?
        }
        Scoring::ProjectionNormDescending => {
            select_top_k(&scores.projections, cfg.budget, SelectOrder::Descending)?
        }
        Scoring::ResidualAscending => {
            select_top_k(&scores.residuals, cfg.budget, SelectOrder::Ascending)?
        }
    };

    let merged = merge_tokens(x, &retained)?;
    let output = if cfg.merge {
        merged.tokens
    } else {
        x.select_rows(&retained)?
    };
    let surrogate_loss = discarded_sum(&scores.residuals, &retained);
    Ok(CompressionResult {
        retained_indices: retained,
        scores: scores.residuals,
        output,
        surrogate_loss,
        assignments: merged.assignments,
        subspace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrcp::config::SubspaceMethod;
    use crate::rng::{gaussian_matrix, seeded};

    fn sample() -> TokenMatrix {
        TokenMatrix::new(gaussian_matrix(24, 6, &mut seeded(12))).unwrap()
    }

    #[test]
    fn no_compression_when_budget_is_n() {
        let x = sample();
        for r in 1..6 {
            let res = compress(&x, &CompressionConfig::new(r, 24)).unwrap();
            assert_eq!(res.output, x);
            assert_eq!(res.surrogate_loss, 0.0);
            assert!(res.assignments.is_empty());
        }
    }

    #[test]
    fn merge_off_returns_original_rows() {
        let x = sample();
        let res = compress(&x, &CompressionConfig::new(2, 5).with_merge(false)).unwrap();
        assert_eq!(res.output, x.select_rows(&res.retained_indices).unwrap());
        assert_eq!(res.assignments.len(), 19);
    }

    #[test]
    fn deterministic() {
        let x = sample();
        for method in [SubspaceMethod::Pca, SubspaceMethod::ClusterCenters] {
            let cfg = CompressionConfig::new(3, 7)
                .with_subspace_method(method)
                .with_seed(5);
            assert_eq!(compress(&x, &cfg).unwrap(), compress(&x, &cfg).unwrap());
        }
    }

    #[test]
    fn projection_norm_scoring_keeps_in_subspace_energy() {
        let x = sample();
        let cfg = CompressionConfig::new(2, 4).with_scoring(Scoring::ProjectionNormDescending);
        let res = compress(&x, &cfg).unwrap();
        let scores = token_scores(&x, &res.subspace).unwrap().projections;
        let min_kept = res
            .retained_indices
            .iter()
            .map(|&i| scores[i])
            .fold(f64::INFINITY, f64::min);
        for i in res.discarded_indices() {
            assert!(scores[i] <= min_kept);
        }
    }
}
