//! Exact (one-sided Jacobi) and randomized truncated SVD.

use ndarray::{s, Array2, ArrayView2};

use super::product::matmul;
use super::qr::{complete_basis, dot, norm, orthonormal_columns};
use crate::error::{LrcpError, Result};
use crate::matrix::{Subspace, TokenMatrix};
use crate::rng::{gaussian_matrix, seeded};

/// Largest `min(N, D)` accepted by [`exact_svd`].
pub const EXACT_SVD_MAX_DIM: usize = 512;

const MAX_SWEEPS: usize = 60;

/// Thin SVD `X = U diag(σ) Vᵀ` with `k = min(N, D)` components.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `N x k` left singular vectors.
    pub u: Array2<f64>,
    /// `D x k` right singular vectors.
    pub v: Array2<f64>,
}

impl Svd {
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut us = self.u.clone();
        for (mut col, &sigma) in us.columns_mut().into_iter().zip(&self.singular_values) {
            col *= sigma;
        }
        us.dot(&self.v.t())
    }
}

/// Exact thin SVD for matrices with `min(N, D) ≤ 512`.
pub fn exact_svd(m: ArrayView2<'_, f64>) -> Result<Svd> {
    let (n, d) = m.dim();
    if n.min(d) > EXACT_SVD_MAX_DIM {
        return Err(LrcpError::TooLargeForExact {
            min_dim: n.min(d),
            limit: EXACT_SVD_MAX_DIM,
        });
    }
    jacobi_svd(m)
}

/// Exact thin SVD of a [`TokenMatrix`].
pub fn exact_svd_tokens(x: &TokenMatrix) -> Result<Svd> {
    exact_svd(x.view())
}

/// One-sided (Hestenes) Jacobi SVD with no size limit.
pub(crate) fn jacobi_svd(m: ArrayView2<'_, f64>) -> Result<Svd> {
    let (n, d) = m.dim();
    if n == 0 || d == 0 {
        return Err(LrcpError::EmptyInput(format!("matrix is {n}x{d}")));
    }
    let tall = n >= d;
    let a = if tall { m } else { m.t() };
    let (rows, cols) = a.dim();

    // Column-major working copy: column j occupies work[j*rows..(j+1)*rows].
    let mut work = vec![0.0; rows * cols];
    for (j, col) in a.columns().into_iter().enumerate() {
        for (dst, &src) in work[j * rows..(j + 1) * rows].iter_mut().zip(col.iter()) {
            *dst = src;
        }
    }
    let mut rot = vec![0.0; cols * cols];
    for j in 0..cols {
        rot[j * cols + j] = 1.0;
    }
    one_sided_jacobi(&mut work, rows, &mut rot, cols)?;

    let sigma: Vec<f64> = (0..cols)
        .map(|j| norm(&work[j * rows..(j + 1) * rows]))
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let sigma_max = sigma[order[0]];
    let negligible = sigma_max * rows as f64 * f64::EPSILON;
    let mut normalized: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for &j in &order {
        if sigma[j] > negligible && sigma[j] > 0.0 {
            let col = &work[j * rows..(j + 1) * rows];
            normalized.push(col.iter().map(|v| v / sigma[j]).collect());
        } else {
            break;
        }
    }
    let good = normalized.len();
    let normalized = Array2::from_shape_fn((rows, good), |(i, j)| normalized[j][i]);
    let normalized = complete_basis(normalized, cols);
    let rotation = Array2::from_shape_fn((cols, cols), |(i, k)| rot[order[k] * cols + i]);
    let singular_values: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(k, &j)| if k < good { sigma[j] } else { 0.0 })
        .collect();

    let (mut u, mut v) = if tall {
        (normalized, rotation)
    } else {
        (rotation, normalized)
    };
    normalize_signs(&mut v, Some(&mut u));
    Ok(Svd {
        singular_values,
        u,
        v,
    })
}

fn one_sided_jacobi(work: &mut [f64], rows: usize, rot: &mut [f64], cols: usize) -> Result<()> {
    let tol = f64::EPSILON * rows.max(cols) as f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let (head, tail) = work.split_at_mut(q * rows);
                let ap = &mut head[p * rows..(p + 1) * rows];
                let aq = &mut tail[..rows];
                let alpha = dot(ap, ap);
                let beta = dot(aq, aq);
                let gamma = dot(ap, aq);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + 1f64.hypot(zeta));
                let c = 1.0 / 1f64.hypot(t);
                let s = c * t;
                rotate(ap, aq, c, s);
                let (head, tail) = rot.split_at_mut(q * cols);
                rotate(&mut head[p * cols..(p + 1) * cols], &mut tail[..cols], c, s);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(LrcpError::DidNotConverge { sweeps: MAX_SWEEPS })
}

#[inline]
fn rotate(ap: &mut [f64], aq: &mut [f64], c: f64, s: f64) {
    for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Flips each column of `v` so its largest-magnitude entry is positive,
/// mirroring the flip onto the matching column of `companion`.
pub(crate) fn normalize_signs(v: &mut Array2<f64>, mut companion: Option<&mut Array2<f64>>) {
    for j in 0..v.ncols() {
        let mut best = 0.0f64;
        let mut best_val = 0.0;
        for &x in v.column(j) {
            if x.abs() > best {
                best = x.abs();
                best_val = x;
            }
        }
        if best_val < 0.0 {
            v.column_mut(j).mapv_inplace(|x| -x);
            if let Some(c) = companion.as_deref_mut() {
                c.column_mut(j).mapv_inplace(|x| -x);
            }
        }
    }
}

/// Tuning for the randomized range finder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsvdParams {
    pub oversampling: usize,
    pub power_iterations: usize,
}

impl Default for RsvdParams {
    fn default() -> Self {
        Self {
            oversampling: 8,
            power_iterations: 2,
        }
    }
}

/// Top-`r` right singular pairs of a randomized SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub singular_values: Vec<f64>,
    /// `D x r`, orthonormal, sign-normalized.
    pub v: Array2<f64>,
}

/// Randomized range finder with power iterations followed by an exact SVD
/// of the small projected matrix. Costs `O(N·D·(r + p)·(2q + 2))`.
pub fn randomized_right_svd(
    x: ArrayView2<'_, f64>,
    r: usize,
    seed: u64,
    params: RsvdParams,
) -> Result<TruncatedSvd> {
    let (n, d) = x.dim();
    let limit = n.min(d);
    if r == 0 || r >= limit {
        return Err(LrcpError::InvalidRank { rank: r, limit });
    }
    let width = (r + params.oversampling).min(limit);
    let mut rng = seeded(seed);
    let omega = gaussian_matrix(d, width, &mut rng);

    let mut q = orthonormal_columns(matmul(x, omega.view()).view());
    for _ in 0..params.power_iterations {
        if q.ncols() == 0 {
            break;
        }
        let z = orthonormal_columns(x.t().dot(&q).view());
        if z.ncols() == 0 {
            q = z;
            break;
        }
        q = orthonormal_columns(matmul(x, z.view()).view());
    }

    let (mut singular_values, v) = if q.ncols() == 0 {
        (Vec::new(), Array2::zeros((d, 0)))
    } else {
        // B = QᵀX, formed as (XᵀQ)ᵀ, which is the faster product shape.
        let bt = x.t().dot(&q);
        let svd = jacobi_svd(bt.t())?;
        let keep = r.min(svd.v.ncols());
        let sv: Vec<f64> = svd.singular_values[..keep].to_vec();
        (sv, svd.v.slice(s![.., ..keep]).to_owned())
    };
    let mut v = complete_basis(v, r);
    singular_values.resize(r, 0.0);
    normalize_signs(&mut v, None);
    Ok(TruncatedSvd { singular_values, v })
}

/// Dominant top-`r` right-singular subspace of `x`.
///
/// Explained fractions are `σ_j² / ‖X‖_F²`, relative to the total energy
/// rather than only the captured part.
pub fn randomized_truncated_svd(x: &TokenMatrix, r: usize, seed: u64) -> Result<Subspace> {
    subspace_from_view(x.view(), x.frobenius_sq(), r, seed, RsvdParams::default())
}

/// `energy` is `‖x‖_F²`, supplied by callers that already know it.
pub(crate) fn subspace_from_view(
    x: ArrayView2<'_, f64>,
    energy: f64,
    r: usize,
    seed: u64,
    params: RsvdParams,
) -> Result<Subspace> {
    let svd = randomized_right_svd(x, r, seed, params)?;
    let explained = explained_fractions(&svd.singular_values, energy);
    Ok(Subspace::from_parts(svd.v, explained, None))
}

pub(crate) fn explained_fractions(singular_values: &[f64], energy: f64) -> Vec<f64> {
    if energy <= 0.0 {
        return vec![0.0; singular_values.len()];
    }
    singular_values
        .iter()
        .map(|s| (s * s / energy).clamp(0.0, 1.0))
        .collect()
}
