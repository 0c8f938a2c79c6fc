//! Dominant-subspace construction.

use ndarray::{Array2, ArrayView2, Axis, CowArray};

use super::config::{validate_rank, Centering, CompressionConfig, SubspaceMethod};
use super::kmeans::{kmeans, DEFAULT_MAX_ITER};
use crate::error::Result;
use crate::linalg::qr::{complete_basis, orthonormal_columns, sum_of_squares};
use crate::linalg::svd::{normalize_signs, subspace_from_view, RsvdParams};
use crate::matrix::{Subspace, TokenMatrix};
use crate::rng::{gaussian_matrix, seeded};

/// Estimates the rank-`cfg.rank` subspace of `x` with `cfg.subspace_method`.
///
/// With [`Centering::MeanCenter`] the column mean is removed first and stored
/// on the returned subspace so residuals are measured from the same origin.
pub fn build_subspace(x: &TokenMatrix, cfg: &CompressionConfig) -> Result<Subspace> {
    validate_rank(cfg.rank, x.n_tokens(), x.dim())?;
    let (work, center) = match cfg.centering {
        Centering::None => (CowArray::from(x.view()), None),
        Centering::MeanCenter => {
            let mean = x.column_mean();
            (CowArray::from(x.centered(&mean)), Some(mean))
        }
    };
    let view = work.view();
    let energy = match center {
        None => x.frobenius_sq(),
        Some(_) => sum_of_squares(&view),
    };
    let r = cfg.rank;

    let subspace = match cfg.subspace_method {
        SubspaceMethod::Pca => {
            subspace_from_view(view, energy, r, cfg.seed, RsvdParams::default())?
        }
        SubspaceMethod::RandomDirections => {
            let draws = gaussian_matrix(x.dim(), r, &mut seeded(cfg.seed));
            let basis = complete_basis(orthonormal_columns(draws.view()), r);
            by_captured_energy(view, energy, basis)
        }
        SubspaceMethod::CoordinateVariance => {
            let axes = top_variance_axes(view, r);
            let basis =
                Array2::from_shape_fn((x.dim(), r), |(i, j)| if i == axes[j] { 1.0 } else { 0.0 });
            by_captured_energy(view, energy, basis)
        }
        SubspaceMethod::ClusterCenters => {
            let centers = kmeans(view, r, cfg.seed, DEFAULT_MAX_ITER);
            let basis = complete_basis(orthonormal_columns(centers.t()), r);
            by_captured_energy(view, energy, basis)
        }
    };
    let (basis, explained, _) = subspace.into_parts();
    Ok(Subspace::from_parts(basis, explained, center))
}

/// Coordinate axes with the largest per-column variance; ties keep the lower axis.
fn top_variance_axes(x: ArrayView2<'_, f64>, r: usize) -> Vec<usize> {
    let variances = x.var_axis(Axis(0), 0.0);
    let mut order: Vec<usize> = (0..variances.len()).collect();
    order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]).then(a.cmp(&b)));
    order.truncate(r);
    order
}

/// Orders basis columns by the fraction of `‖X‖_F²` each captures, then
/// applies the sign convention.
fn by_captured_energy(x: ArrayView2<'_, f64>, energy: f64, basis: Array2<f64>) -> Subspace {
    let projected = x.dot(&basis);
    let captured: Vec<f64> = projected
        .columns()
        .into_iter()
        .map(|c| {
            if energy > 0.0 {
                (c.iter().map(|v| v * v).sum::<f64>() / energy).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..captured.len()).collect();
    order.sort_by(|&a, &b| captured[b].total_cmp(&captured[a]).then(a.cmp(&b)));
    let mut sorted: Array2<f64> = basis.select(Axis(1), &order);
    normalize_signs(&mut sorted, None);
    let explained = order.iter().map(|&j| captured[j]).collect();
    Subspace::from_parts(sorted, explained, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::LrcpError;
    use crate::linalg::angles::principal_angle_similarity;
    use crate::matrix::orthonormality_error;
    use rand::Rng;

    fn cfg(r: usize) -> CompressionConfig {
        CompressionConfig::new(r, 1)
    }

    #[test]
    fn rank_one_rows() {
        let v = [3.0, -4.0, 0.0, 12.0];
        let x = TokenMatrix::from_rows(&[v; 6]).unwrap();
        let s = build_subspace(&x, &cfg(1)).unwrap();
        let norm = 13.0;
        for (i, &vi) in v.iter().enumerate() {
            assert!((s.basis()[[i, 0]].abs() - (vi / norm).abs()).abs() < 1e-12);
        }
        assert!((s.explained()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planted_plane_recovered() {
        let mut rng = seeded(4);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                vec![a, b, 0.0, 0.0, 0.0]
            })
            .collect();
        let x = TokenMatrix::from_rows(&rows).unwrap();
        let s = build_subspace(&x, &cfg(2)).unwrap();
        let truth = Subspace::new(
            Array2::from_shape_fn((5, 2), |(i, j)| if i == j { 1.0 } else { 0.0 }),
            vec![0.0; 2],
        )
        .unwrap();
        let sim = principal_angle_similarity(&s, &truth).unwrap();
        assert!((sim - 1.0).abs() < 1e-8);
    }

    #[test]
    fn every_method_orthonormal_and_deterministic() {
        let x = TokenMatrix::new(gaussian_matrix(20, 6, &mut seeded(8))).unwrap();
        for method in [
            SubspaceMethod::Pca,
            SubspaceMethod::RandomDirections,
            SubspaceMethod::CoordinateVariance,
            SubspaceMethod::ClusterCenters,
        ] {
            for centering in [Centering::None, Centering::MeanCenter] {
                let c = cfg(3)
                    .with_subspace_method(method)
                    .with_centering(centering)
                    .with_seed(17);
                let a = build_subspace(&x, &c).unwrap();
                let b = build_subspace(&x, &c).unwrap();
                assert_eq!(a, b, "{method:?}");
                assert!(orthonormality_error(&a.basis()) < 1e-8, "{method:?}");
                assert!(a.explained().windows(2).all(|w| w[0] >= w[1]));
                assert!(a.explained().iter().sum::<f64>() <= 1.0 + 1e-8);
                assert_eq!(a.center().is_some(), centering == Centering::MeanCenter);
            }
        }
    }

    #[test]
    fn coordinate_variance_picks_noisy_axes() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![1.0, (i as f64) * 3.0, 0.5 * i as f64, 2.0])
            .collect();
        let x = TokenMatrix::from_rows(&rows).unwrap();
        let s = build_subspace(
            &x,
            &cfg(2).with_subspace_method(SubspaceMethod::CoordinateVariance),
        )
        .unwrap();
        let mut axes: Vec<usize> = s
            .basis()
            .columns()
            .into_iter()
            .map(|c| c.iter().position(|&v| v != 0.0).unwrap())
            .collect();
        axes.sort();
        assert_eq!(axes, vec![1, 2]);
    }

    #[test]
    fn cluster_centers_survive_duplicate_centers() {
        let x = TokenMatrix::from_rows(&[[1.0, 2.0, 3.0]; 4]).unwrap();
        let s = build_subspace(
            &x,
            &cfg(2).with_subspace_method(SubspaceMethod::ClusterCenters),
        )
        .unwrap();
        assert_eq!(s.rank(), 2);
        assert!(orthonormality_error(&s.basis()) < 1e-8);
    }

    #[test]
    fn invalid_rank() {
        let x = TokenMatrix::new(gaussian_matrix(5, 3, &mut seeded(0))).unwrap();
        assert!(matches!(
            build_subspace(&x, &cfg(3)),
            Err(LrcpError::InvalidRank { .. })
        ));
    }
}
