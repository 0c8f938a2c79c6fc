//! Effective-rank spectra and subspace-stability experiments.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LrcpError, Result};
use crate::linalg::angles::principal_angle_similarity;
use crate::linalg::svd::{
    exact_svd, explained_fractions, randomized_right_svd, subspace_from_view, RsvdParams,
    EXACT_SVD_MAX_DIM,
};
use crate::lrcp::config::{validate_rank, CompressionConfig};
use crate::lrcp::{build_subspace, compress};
use crate::matrix::TokenMatrix;
use crate::rng::stream;

/// Cumulative fractions within this distance of the target count as reaching it.
const CUMULATIVE_TOL: f64 = 1e-12;

/// Seed for the randomized spectrum path (matrices with `min(N, D) > 512`).
pub const SPECTRUM_SEED: u64 = 0;

/// Default number of random-dropout trials.
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `σ_j² / ‖X‖_F²`, non-increasing.
    pub explained: Vec<f64>,
    /// Percentage (as written, e.g. `"95"`) -> Rank@v.
    pub rank_at: BTreeMap<String, usize>,
    /// `‖X‖_F²`.
    pub total_energy: f64,
}

impl SpectrumReport {
    /// Fills `rank_at` for every percentage in `variances`.
    pub fn with_rank_at(mut self, variances: &[f64]) -> Result<Self> {
        for &v in variances {
            let rank = rank_at_variance(&self, v)?;
            self.rank_at.insert(percent_key(v), rank);
        }
        Ok(self)
    }

    pub fn rank_at_percent(&self, v: f64) -> Option<usize> {
        self.rank_at.get(&percent_key(v)).copied()
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.explained
            .iter()
            .scan(0.0, |acc, &f| {
                *acc += f;
                Some(*acc)
            })
            .collect()
    }
}

fn percent_key(v: f64) -> String {
    format!("{v}")
}

/// Leading `max_components` explained-variance fractions of `x`.
///
/// Uses the exact SVD when `min(N, D) ≤ 512`, else a randomized SVD with
/// `r = max_components` (which must then be below `min(N, D)`).
pub fn explained_variance_spectrum(
    x: &TokenMatrix,
    max_components: usize,
) -> Result<SpectrumReport> {
    let limit = x.n_tokens().min(x.dim());
    if max_components == 0 || max_components > limit {
        return Err(LrcpError::InvalidComponentCount {
            requested: max_components,
            limit,
        });
    }
    let energy = x.frobenius_sq();
    let singular_values = if limit <= EXACT_SVD_MAX_DIM {
        let mut sv = exact_svd(x.view())?.singular_values;
        sv.truncate(max_components);
        sv
    } else {
        if max_components >= limit {
            return Err(LrcpError::InvalidComponentCount {
                requested: max_components,
                limit: limit - 1,
            });
        }
        randomized_right_svd(
            x.view(),
            max_components,
            SPECTRUM_SEED,
            RsvdParams::default(),
        )?
        .singular_values
    };
    Ok(SpectrumReport {
        explained: explained_fractions(&singular_values, energy),
        rank_at: BTreeMap::new(),
        total_energy: energy,
    })
}

/// Rank@v: the fewest leading components whose fractions sum to `v / 100`.
pub fn rank_at_variance(spectrum: &SpectrumReport, v: f64) -> Result<usize> {
    rank_for_fractions(&spectrum.explained, v)
}

pub fn rank_for_fractions(explained: &[f64], v: f64) -> Result<usize> {
    if !(v > 0.0 && v <= 100.0) {
        return Err(LrcpError::InvalidVariance(v));
    }
    let target = v / 100.0;
    let mut cumulative = 0.0;
    for (j, f) in explained.iter().enumerate() {
        cumulative += f;
        if cumulative >= target - CUMULATIVE_TOL {
            return Ok(j + 1);
        }
    }
    Err(LrcpError::InsufficientSpectrum {
        components: explained.len(),
        reached: cumulative,
        target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    RandomDropout,
    ImportancePruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mode: StabilityMode,
    pub rank: usize,
    /// For importance pruning, the drop ratio of the last stage.
    pub drop_ratio: f64,
    pub trials: usize,
    /// One entry per trial (dropout) or per stage (pruning), in `[0, 1]`.
    pub similarities: Vec<f64>,
    pub mean_similarity: f64,
    pub min_similarity: f64,
    /// Retained token counts per stage; empty for random dropout.
    #[serde(default)]
    pub stage_keeps: Vec<usize>,
}

fn summarize(similarities: &[f64]) -> (f64, f64) {
    let mean = similarities.iter().sum::<f64>() / similarities.len() as f64;
    let min = similarities.iter().cloned().fold(f64::INFINITY, f64::min);
    (mean, min)
}

/// Similarity between the full-set top-`r` subspace and subspaces
/// re-estimated from uniformly sampled subsets of `(1 − drop_ratio)·N` rows.
///
/// Trial `t` samples with stream `t + 1` of `seed`, so trials may run in any
/// order and still reproduce.
pub fn stability_random_dropout(
    x: &TokenMatrix,
    r: usize,
    drop_ratio: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if !(0.0..1.0).contains(&drop_ratio) {
        return Err(LrcpError::InvalidDropRatio(drop_ratio));
    }
    if trials == 0 {
        return Err(LrcpError::EmptyInput("zero trials".into()));
    }
    let n = x.n_tokens();
    validate_rank(r, n, x.dim())?;
    let survivors = ((1.0 - drop_ratio) * n as f64 + 1e-9).floor() as usize;
    if survivors <= r {
        return Err(LrcpError::TooFewSurvivors { survivors, rank: r });
    }
    let params = RsvdParams::default();
    let reference = subspace_from_view(x.view(), x.frobenius_sq(), r, seed, params)?;
    let similarities = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64 + 1);
            let mut rows = sample(&mut rng, n, survivors).into_vec();
            rows.sort_unstable();
            let subset = x.select_rows(&rows)?;
            let estimate =
                subspace_from_view(subset.view(), subset.frobenius_sq(), r, seed, params)?;
            principal_angle_similarity(&reference, &estimate)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean_similarity, min_similarity) = summarize(&similarities);
    Ok(StabilityReport {
        mode: StabilityMode::RandomDropout,
        rank: r,
        drop_ratio,
        trials,
        similarities,
        mean_similarity,
        min_similarity,
        stage_keeps: Vec::new(),
    })
}

/// Similarity between the full-set subspace and the subspace re-estimated
/// from the tokens LRCP retains (selection only, no merging) at each keep.
pub fn stability_under_pruning(
    x: &TokenMatrix,
    cfg: &CompressionConfig,
    stage_keeps: &[usize],
) -> Result<StabilityReport> {
    let n = x.n_tokens();
    if stage_keeps.is_empty() || stage_keeps[0] > n || stage_keeps.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(LrcpError::InvalidKeeps);
    }
    if let Some(&keep) = stage_keeps.iter().find(|&&k| k <= cfg.rank) {
        return Err(LrcpError::KeepBelowRank {
            keep,
            rank: cfg.rank,
        });
    }
    let reference = build_subspace(x, cfg)?;
    let similarities = stage_keeps
        .par_iter()
        .map(|&keep| {
            let selection = cfg.clone().with_budget(keep).with_merge(false);
            let result = compress(x, &selection)?;
            let estimate = build_subspace(&result.output, cfg)?;
            principal_angle_similarity(&reference, &estimate)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean_similarity, min_similarity) = summarize(&similarities);
    let last = *stage_keeps.last().expect("non-empty");
    Ok(StabilityReport {
        mode: StabilityMode::ImportancePruned,
        rank: cfg.rank,
        drop_ratio: 1.0 - last as f64 / n as f64,
        trials: stage_keeps.len(),
        similarities,
        mean_similarity,
        min_similarity,
        stage_keeps: stage_keeps.to_vec(),
    })
}
