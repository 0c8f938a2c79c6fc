//! Seeded synthetic token matrices with planted structure, plus the
//! exhaustive subset oracle.

use ndarray::{s, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{LrcpError, Result};
use crate::linalg::qr::{complete_basis, orthonormal_columns};
use crate::linalg::svd::{explained_fractions, normalize_signs};
use crate::lrcp::loss::discarded_sum;
use crate::lrcp::merge::validate_retained;
use crate::lrcp::score::projection_residuals;
use crate::matrix::{Subspace, TokenMatrix};
use crate::rng::{gaussian_matrix, seeded};

/// Largest number of subsets [`brute_force_best_subset`] will enumerate.
pub const MAX_SUBSETS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    /// Student-t draws rescaled to unit variance (requires `dof > 2`).
    StudentT { dof: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub matrix: TokenMatrix,
    pub true_subspace: Subspace,
    /// Ascending.
    pub outlier_indices: Vec<usize>,
    pub noise_sigma: f64,
}

/// Entry-wise noise level giving `‖σG‖_F ≈ relative · ‖signal‖_F` for an
/// `n x d` instance with orthonormal planted factors.
pub fn sigma_for_relative_noise(spectrum: &[f64], n: usize, d: usize, relative: f64) -> f64 {
    let signal = spectrum.iter().map(|s| s * s).sum::<f64>().sqrt();
    relative * signal / ((n * d) as f64).sqrt()
}

/// `X = A·diag(spectrum)·Bᵀ + σ·G` with seeded orthonormal `A (n x r)`,
/// `B (d x r)` and Gaussian `G`.
pub fn gen_low_rank_noise(
    n: usize,
    d: usize,
    r: usize,
    spectrum: &[f64],
    sigma: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    gen_low_rank_noise_with(n, d, r, spectrum, sigma, NoiseKind::Gaussian, seed)
}

pub fn gen_low_rank_noise_with(
    n: usize,
    d: usize,
    r: usize,
    spectrum: &[f64],
    sigma: f64,
    noise: NoiseKind,
    seed: u64,
) -> Result<PlantedInstance> {
    if r == 0 || r > n.min(d) {
        return Err(LrcpError::InvalidSpectrum(format!(
            "rank {r} must lie in [1, min({n}, {d})]"
        )));
    }
    if spectrum.len() != r {
        return Err(LrcpError::InvalidSpectrum(format!(
            "{} singular values for rank {r}",
            spectrum.len()
        )));
    }
    if spectrum.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(LrcpError::InvalidSpectrum("values must be positive".into()));
    }
    if spectrum.windows(2).any(|w| w[1] > w[0]) {
        return Err(LrcpError::InvalidSpectrum(
            "values must be non-increasing".into(),
        ));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(LrcpError::InvalidSpectrum(format!("noise sigma {sigma}")));
    }
    if let NoiseKind::StudentT { dof } = noise {
        if dof.is_nan() || dof <= 2.0 {
            return Err(LrcpError::InvalidSpectrum(format!(
                "student-t degrees of freedom {dof} must exceed 2"
            )));
        }
    }

    let mut rng = seeded(seed);
    let left = planted_basis(n, r, &mut rng);
    let mut right = planted_basis(d, r, &mut rng);
    let mut scaled = left;
    for (mut col, &s) in scaled.axis_iter_mut(Axis(1)).zip(spectrum) {
        col *= s;
    }
    let mut data = scaled.dot(&right.t());
    if sigma > 0.0 {
        match noise {
            NoiseKind::Gaussian => {
                data.iter_mut()
                    .for_each(|v| *v += sigma * rng.sample::<f64, _>(StandardNormal));
            }
            NoiseKind::StudentT { dof } => {
                let dist = StudentT::new(dof).expect("dof validated");
                let scale = sigma * ((dof - 2.0) / dof).sqrt();
                data.iter_mut().for_each(|v| *v += scale * rng.sample(dist));
            }
        }
    }
    let matrix = TokenMatrix::new(data)?;
    normalize_signs(&mut right, None);
    let explained = explained_fractions(spectrum, matrix.frobenius_sq());
    Ok(PlantedInstance {
        matrix,
        true_subspace: Subspace::from_parts(right, explained, None),
        outlier_indices: Vec::new(),
        noise_sigma: sigma,
    })
}

/// Background tokens drawn in a random rank-`r` subspace with standard
/// normal coefficients, plus unit-norm outlier tokens along mutually
/// orthogonal directions orthogonal to that subspace. Rows are shuffled.
pub fn gen_background_outliers(
    n_background: usize,
    n_outliers: usize,
    d: usize,
    r: usize,
    seed: u64,
) -> Result<PlantedInstance> {
    if r == 0 || r + n_outliers > d {
        return Err(LrcpError::DimensionTooSmall {
            dim: d,
            rank: r,
            outliers: n_outliers,
        });
    }
    let n = n_background + n_outliers;
    if n == 0 {
        return Err(LrcpError::EmptyInput("no tokens requested".into()));
    }
    let mut rng = seeded(seed);
    let directions = planted_basis(d, r + n_outliers, &mut rng);
    let mut background = directions.slice(s![.., ..r]).to_owned();
    let outlier_dirs = directions.slice(s![.., r..]);

    let coeffs = gaussian_matrix(n_background, r, &mut rng);
    let background_rows = coeffs.dot(&background.t());

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    // order[row] = source slot; slots >= n_background are outliers.
    let mut data = Array2::zeros((n, d));
    let mut outlier_indices = Vec::with_capacity(n_outliers);
    for (row, &slot) in order.iter().enumerate() {
        if slot < n_background {
            data.row_mut(row).assign(&background_rows.row(slot));
        } else {
            data.row_mut(row)
                .assign(&outlier_dirs.column(slot - n_background));
            outlier_indices.push(row);
        }
    }
    let matrix = TokenMatrix::new(data)?;
    normalize_signs(&mut background, None);
    let energy = matrix.frobenius_sq();
    let captured: Vec<f64> = matrix
        .as_array()
        .dot(&background)
        .columns()
        .into_iter()
        .map(|c| c.dot(&c).sqrt())
        .collect();
    let explained = explained_fractions(&captured, energy);
    Ok(PlantedInstance {
        matrix,
        true_subspace: Subspace::from_parts(background, explained, None),
        outlier_indices,
        noise_sigma: 0.0,
    })
}

fn planted_basis<R: Rng + ?Sized>(dim: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let draws = gaussian_matrix(dim, cols, rng);
    complete_basis(orthonormal_columns(draws.view()), cols)
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive minimizer of the surrogate loss over all size-`k` subsets.
///
/// Subsets are visited in lexicographic order and only a strictly smaller
/// loss replaces the incumbent, so the lexicographically smallest minimizer
/// is returned.
pub fn brute_force_best_subset(
    x: &TokenMatrix,
    s: &Subspace,
    k: usize,
) -> Result<(Vec<usize>, f64)> {
    let n = x.n_tokens();
    if k == 0 || k > n {
        return Err(LrcpError::BudgetExceedsTokens {
            budget: k,
            n_tokens: n,
        });
    }
    let count = binomial(n, k);
    if count > MAX_SUBSETS {
        return Err(LrcpError::TooManySubsets {
            count,
            bound: MAX_SUBSETS,
        });
    }
    let scores = projection_residuals(x, s)?;
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = combo.clone();
    let mut best_loss = discarded_sum(&scores, &combo);
    while next_combination(&mut combo, n) {
        let loss = discarded_sum(&scores, &combo);
        if loss < best_loss {
            best_loss = loss;
            best.copy_from_slice(&combo);
        }
    }
    validate_retained(&best, n)?;
    Ok((best, best_loss))
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
