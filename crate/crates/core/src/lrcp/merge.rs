//! Folding discarded tokens into their most similar retained token.

use std::collections::BTreeMap;

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::error::{LrcpError, Result};
use crate::linalg::product::matmul;
use crate::matrix::TokenMatrix;

/// Discarded rows are scored against retained rows in blocks of this many.
const BLOCK_ROWS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    /// One row per retained index, in ascending index order.
    pub tokens: TokenMatrix,
    /// Discarded index -> retained index it was folded into.
    pub assignments: BTreeMap<usize, usize>,
    /// `|A_j|` for each output row.
    pub group_sizes: Vec<usize>,
}

/// Sorted, de-duplicated and range-checked copy of `retained`.
pub(crate) fn validate_retained(retained: &[usize], n_tokens: usize) -> Result<Vec<usize>> {
    if retained.is_empty() {
        return Err(LrcpError::EmptyInput("retained set is empty".into()));
    }
    let mut sorted = retained.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(LrcpError::DuplicateIndex(pair[0]));
        }
    }
    if let Some(&index) = sorted.last().filter(|&&i| i >= n_tokens) {
        return Err(LrcpError::IndexOutOfRange { index, n_tokens });
    }
    Ok(sorted)
}

/// Assigns each discarded token to the retained token with the highest
/// cosine similarity (ties and zero vectors go to the lowest retained index)
/// and replaces every retained token by the mean of itself and its group.
///
/// Similarities are taken against the original retained features. A
/// discarded row's own norm scales all of its cosines equally, so ranking
/// uses `x_i · x̂_j` and rows are never copied or normalized.
pub fn merge_tokens(x: &TokenMatrix, retained: &[usize]) -> Result<MergeOutcome> {
    let n = x.n_tokens();
    let retained = validate_retained(retained, n)?;
    let mut is_retained = vec![false; n];
    for &j in &retained {
        is_retained[j] = true;
    }

    let kept = x.as_array().select(Axis(0), &retained);
    let kept_unit = unit_rows(kept.view());

    let mut sums = kept;
    let mut group_sizes = vec![0usize; retained.len()];
    let mut assignments = BTreeMap::new();
    for start in (0..n).step_by(BLOCK_ROWS) {
        let end = (start + BLOCK_ROWS).min(n);
        if is_retained[start..end].iter().all(|&r| r) {
            continue;
        }
        let sims = matmul(x.as_array().slice(s![start..end, ..]), kept_unit.t());
        for i in (start..end).filter(|&i| !is_retained[i]) {
            let target = argmax_first(sims.row(i - start).iter().copied());
            let mut acc = sums.row_mut(target);
            acc += &x.row(i);
            group_sizes[target] += 1;
            assignments.insert(i, retained[target]);
        }
    }
    for (mut row, &size) in sums.axis_iter_mut(Axis(0)).zip(&group_sizes) {
        if size > 0 {
            row /= (1 + size) as f64;
        }
    }
    Ok(MergeOutcome {
        tokens: TokenMatrix::new(sums)?,
        assignments,
        group_sizes,
    })
}

/// Rows scaled to unit length; zero rows stay zero so their cosine is 0.
fn unit_rows(m: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (j, v) in values.enumerate() {
        if v > best_val {
            best_val = v;
            best = j;
        }
    }
    best
}
