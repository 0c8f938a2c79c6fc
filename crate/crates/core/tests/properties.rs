use lrcp_core::linalg::{randomized_right_svd, RsvdParams};
use lrcp_core::lrcp::{discarded_sum, SelectOrder};
use lrcp_core::rng::{gaussian_matrix, seeded};
use lrcp_core::spectrum::rank_for_fractions;
use lrcp_core::{
    brute_force_best_subset, compress, exact_svd, merge_tokens, orthonormality_error,
    principal_angle_similarity, projection_residuals, qr_orthonormalize, randomized_truncated_svd,
    select_top_k, stability_under_pruning, surrogate_loss, surrogate_loss_dense, CompressionConfig,
    Subspace, SubspaceMethod, TokenMatrix,
};
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn random_matrix(n: usize, d: usize, seed: u64) -> TokenMatrix {
    TokenMatrix::new(gaussian_matrix(n, d, &mut seeded(seed))).unwrap()
}

fn random_orthogonal(d: usize, seed: u64) -> Array2<f64> {
    qr_orthonormalize(gaussian_matrix(d, d, &mut seeded(seed)).view()).unwrap()
}

fn random_subset(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded(seed));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Smallest relative gap between the K-th and (K+1)-th largest scores.
fn boundary_gap(scores: &[f64], k: usize) -> f64 {
    if k == scores.len() {
        return f64::INFINITY;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    (sorted[k - 1] - sorted[k]) / sorted[0].max(1e-300)
}

fn instance() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (3usize..=12, 2usize..=8, any::<u64>()).prop_flat_map(|(n, d, seed)| {
        let max_rank = n.min(d) - 1;
        (Just(n), Just(d), 1..=max_rank.clamp(1, 3), Just(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn loss_identity((n, d, r, seed) in instance(), k_frac in 0.0f64..1.0) {
        prop_assume!(r < n.min(d));
        let x = random_matrix(n, d, seed);
        let s = randomized_truncated_svd(&x, r, seed).unwrap();
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let subset = random_subset(n, k, seed ^ 0x5eed);
        let scale = x.frobenius_sq().max(1.0);
        let loss = surrogate_loss(&x, &s, &subset).unwrap();
        let sum = discarded_sum(&projection_residuals(&x, &s).unwrap(), &subset);
        let dense = surrogate_loss_dense(&x, &s, &subset).unwrap();
        prop_assert!((loss - sum).abs() <= 1e-8 * scale);
        prop_assert!((loss - dense).abs() <= 1e-8 * scale);
    }

    #[test]
    fn top_k_is_optimal((n, d, r, seed) in instance(), k_frac in 0.0f64..1.0) {
        prop_assume!(r < n.min(d));
        let x = random_matrix(n, d, seed);
        let s = randomized_truncated_svd(&x, r, seed).unwrap();
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let scores = projection_residuals(&x, &s).unwrap();
        let picked = select_top_k(&scores, k, SelectOrder::Descending).unwrap();
        let (_, best) = brute_force_best_subset(&x, &s, k).unwrap();
        prop_assert_eq!(surrogate_loss(&x, &s, &picked).unwrap(), best);
    }

    #[test]
    fn scale_equivariance((n, d, r, seed) in instance(), c in 0.01f64..100.0, k_frac in 0.0f64..1.0) {
        prop_assume!(r < n.min(d));
        let x = random_matrix(n, d, seed);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let cfg = CompressionConfig::new(r, k).with_seed(seed);
        let base = compress(&x, &cfg).unwrap();
        prop_assume!(boundary_gap(&base.scores, k) > 1e-6);
        let scaled = TokenMatrix::new(x.as_array() * c).unwrap();
        prop_assert_eq!(compress(&scaled, &cfg).unwrap().retained_indices, base.retained_indices);
    }

    #[test]
    fn rotation_invariance((n, d, r, seed) in instance()) {
        prop_assume!(r < n.min(d));
        let x = random_matrix(n, d, seed);
        let sv = exact_svd(x.view()).unwrap().singular_values;
        prop_assume!(sv[r] < 0.95 * sv[r - 1]);
        let q = random_orthogonal(d, seed.wrapping_add(1));
        let rotated = TokenMatrix::new(x.as_array().dot(&q)).unwrap();
        let k = (n / 2).max(1);
        let cfg = CompressionConfig::new(r, k).with_seed(seed);
        let a = compress(&x, &cfg).unwrap();
        let b = compress(&rotated, &cfg).unwrap();
        let scale = x.frobenius_sq().max(1.0);
        for (sa, sb) in a.scores.iter().zip(&b.scores) {
            prop_assert!((sa - sb).abs() <= 1e-8 * scale);
        }
        if boundary_gap(&a.scores, k) > 1e-6 {
            prop_assert_eq!(a.retained_indices, b.retained_indices);
        }
    }

    #[test]
    fn merge_conserves_mass((n, d, _r, seed) in instance(), k_frac in 0.0f64..1.0) {
        let x = random_matrix(n, d, seed);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let retained = random_subset(n, k, seed ^ 7);
        let merged = merge_tokens(&x, &retained).unwrap();
        let mut total = merged.tokens.as_array().clone();
        for (mut row, &g) in total.axis_iter_mut(Axis(0)).zip(&merged.group_sizes) {
            row *= (1 + g) as f64;
        }
        let lhs = total.sum_axis(Axis(0));
        let rhs = x.as_array().sum_axis(Axis(0));
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn selection_without_merge_is_bitwise((n, d, r, seed) in instance(), k_frac in 0.0f64..1.0) {
        prop_assume!(r < n.min(d));
        let x = random_matrix(n, d, seed);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let res = compress(&x, &CompressionConfig::new(r, k).with_merge(false)).unwrap();
        for (row, &i) in res.output.as_array().rows().into_iter().zip(&res.retained_indices) {
            for (a, b) in row.iter().zip(x.row(i).iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn duplicate_merge_is_idempotent(k in 1usize..6, copies in 1usize..4, d in 2usize..8, seed in any::<u64>()) {
        let base = random_matrix(k, d, seed);
        let mut rows = base.to_rows();
        for c in 0..copies {
            for i in 0..k {
                if (i + c) % 2 == 0 {
                    rows.push(base.to_rows()[i].clone());
                }
            }
        }
        let x = TokenMatrix::from_rows(&rows).unwrap();
        let retained: Vec<usize> = (0..k).collect();
        let merged = merge_tokens(&x, &retained).unwrap();
        for (a, b) in merged.tokens.as_array().iter().zip(base.as_array().iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn compress_is_deterministic((n, d, r, seed) in instance(), method in 0usize..4) {
        prop_assume!(r < n.min(d));
        let x = random_matrix(n, d, seed);
        let method = SubspaceMethod::ALL[method];
        let cfg = CompressionConfig::new(r, (n / 2).max(1)).with_seed(seed).with_subspace_method(method);
        prop_assert_eq!(compress(&x, &cfg).unwrap(), compress(&x, &cfg).unwrap());
    }

    #[test]
    fn factorizations_are_orthonormal(n in 1usize..40, d in 1usize..40, seed in any::<u64>()) {
        let x = random_matrix(n, d, seed);
        let svd = exact_svd(x.view()).unwrap();
        prop_assert!(orthonormality_error(&svd.u.view()) <= 1e-8);
        prop_assert!(orthonormality_error(&svd.v.view()) <= 1e-8);
        if n.min(d) > 1 {
            let r = 1 + (seed as usize) % (n.min(d) - 1);
            let s = randomized_truncated_svd(&x, r, seed).unwrap();
            prop_assert!(orthonormality_error(&s.basis()) <= 1e-8);
        }
    }

    #[test]
    fn randomized_svd_is_reproducible(n in 2usize..60, d in 2usize..60, seed in any::<u64>()) {
        let x = random_matrix(n, d, seed);
        let r = 1 + (seed as usize) % (n.min(d) - 1).max(1);
        prop_assume!(r < n.min(d));
        let a = randomized_right_svd(x.view(), r, seed, RsvdParams::default()).unwrap();
        let b = randomized_right_svd(x.view(), r, seed, RsvdParams::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn similarity_is_rotation_invariant(d in 3usize..20, r in 1usize..3, seed in any::<u64>()) {
        prop_assume!(r < d);
        let a = qr_orthonormalize(gaussian_matrix(d, r, &mut seeded(seed)).view()).unwrap();
        let b = qr_orthonormalize(gaussian_matrix(d, r, &mut seeded(seed ^ 1)).view()).unwrap();
        let q = random_orthogonal(r, seed ^ 2);
        let sa = Subspace::new(a.clone(), vec![0.0; r]).unwrap();
        let sb = Subspace::new(b.clone(), vec![0.0; r]).unwrap();
        let sbq = Subspace::new(b.dot(&q), vec![0.0; r]).unwrap();
        let saq = Subspace::new(a.dot(&q), vec![0.0; r]).unwrap();
        let base = principal_angle_similarity(&sa, &sb).unwrap();
        prop_assert!((base - principal_angle_similarity(&sa, &sbq).unwrap()).abs() < 1e-10);
        prop_assert!((base - principal_angle_similarity(&saq, &sb).unwrap()).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn rank_at_is_monotone(values in prop::collection::vec(0.0f64..1.0, 1..20), v1 in 1.0f64..=100.0, v2 in 1.0f64..=100.0) {
        let total: f64 = values.iter().sum();
        prop_assume!(total > 0.0);
        let mut fractions: Vec<f64> = values.iter().map(|v| v / total).collect();
        fractions.sort_by(|a, b| b.total_cmp(a));
        let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
        let a = rank_for_fractions(&fractions, lo).unwrap();
        let b = rank_for_fractions(&fractions, hi).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn pruning_stability_ignores_row_order(seed in any::<u64>()) {
        let planted = lrcp_core::gen_background_outliers(60, 4, 16, 2, seed).unwrap();
        let x = planted.matrix;
        let mut order: Vec<usize> = (0..x.n_tokens()).collect();
        order.shuffle(&mut seeded(seed ^ 3));
        let permuted = x.select_rows(&order).unwrap();
        let cfg = CompressionConfig::new(2, 1).with_seed(seed);
        let a = stability_under_pruning(&x, &cfg, &[32, 16]).unwrap();
        let b = stability_under_pruning(&permuted, &cfg, &[32, 16]).unwrap();
        prop_assert!((a.mean_similarity - b.mean_similarity).abs() < 1e-8);
    }
}
