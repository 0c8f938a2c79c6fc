use lrcp_core::lrcp::SelectOrder;
use lrcp_core::synth::sigma_for_relative_noise;
use lrcp_core::{
    brute_force_best_subset, compress, exact_svd, explained_variance_spectrum,
    gen_background_outliers, gen_low_rank_noise, principal_angle_similarity, projection_residuals,
    randomized_truncated_svd, rank_at_variance, select_top_k, stability_random_dropout,
    stability_under_pruning, surrogate_loss, CompressionConfig, Scoring, TokenMatrix,
};

/// Fraction of `‖X‖_F²` captured by the planted subspace. By Ky Fan's
/// maximum principle this lower-bounds the top-r explained fraction.
fn planted_capture(x: &TokenMatrix, basis: ndarray::ArrayView2<'_, f64>) -> f64 {
    let proj = x.as_array().dot(&basis);
    proj.iter().map(|v| v * v).sum::<f64>() / x.frobenius_sq()
}

#[test]
fn noiseless_rank_two_has_two_singular_values() {
    let p = gen_low_rank_noise(40, 12, 2, &[3.0, 1.0], 0.0, 1).unwrap();
    let sv = exact_svd(p.matrix.view()).unwrap().singular_values;
    let nonzero = sv.iter().filter(|&&s| s > 1e-10 * sv[0]).count();
    assert_eq!(nonzero, 2);
}

#[test]
fn planted_spectrum_is_recovered() {
    let p = gen_low_rank_noise(30, 20, 2, &[10.0, 5.0], 0.0, 2).unwrap();
    let sv = exact_svd(p.matrix.view()).unwrap().singular_values;
    assert!((sv[0] - 10.0).abs() < 1e-8);
    assert!((sv[1] - 5.0).abs() < 1e-8);
}

#[test]
fn rank_at_95_with_small_noise() {
    let p = gen_low_rank_noise(256, 64, 3, &[10.0, 8.0, 6.0], 0.01, 3).unwrap();
    let report = explained_variance_spectrum(&p.matrix, 64).unwrap();
    // Noise energy ≈ σ²·N·D = 1.6 against signal energy 200.
    let noise = 0.01f64.powi(2) * 256.0 * 64.0;
    assert!(noise / (200.0 + noise) < 0.05);
    assert_eq!(rank_at_variance(&report, 95.0).unwrap(), 3);
}

#[test]
fn top_three_fractions_with_five_percent_noise() {
    let spectrum = [10.0, 8.0, 6.0];
    let sigma = sigma_for_relative_noise(&spectrum, 256, 64, 0.05);
    let p = gen_low_rank_noise(256, 64, 3, &spectrum, sigma, 4).unwrap();
    let report = explained_variance_spectrum(&p.matrix, 3).unwrap();
    let top3: f64 = report.explained.iter().sum();
    let bound = planted_capture(&p.matrix, p.true_subspace.basis());
    assert!(top3 >= bound - 1e-12, "{top3} < {bound}");
    assert!(top3 >= 0.95, "{top3}");
}

#[test]
fn rank_at_100_is_numerical_rank() {
    for (r, seed) in [(1, 5), (3, 6), (5, 7)] {
        let spectrum: Vec<f64> = (0..r).map(|i| 8.0 - i as f64).collect();
        let p = gen_low_rank_noise(50, 20, r, &spectrum, 0.0, seed).unwrap();
        let report = explained_variance_spectrum(&p.matrix, 20).unwrap();
        assert_eq!(rank_at_variance(&report, 100.0).unwrap(), r);
    }
}

#[test]
fn randomized_matches_exact_on_large_planted() {
    let spectrum = [40.0, 30.0, 20.0, 10.0];
    let sigma = 0.001 * 10.0 / (256f64).sqrt();
    let p = gen_low_rank_noise(1024, 256, 4, &spectrum, sigma, 8).unwrap();
    let approx = randomized_truncated_svd(&p.matrix, 4, 0).unwrap();
    let sim = principal_angle_similarity(&approx, &p.true_subspace).unwrap();
    assert!(sim >= 0.999, "{sim}");
}

#[test]
fn outliers_are_retained() {
    let p = gen_background_outliers(60, 4, 16, 1, 9).unwrap();
    let res = compress(&p.matrix, &CompressionConfig::new(1, 4)).unwrap();
    assert_eq!(res.retained_indices, p.outlier_indices);
}

#[test]
fn background_only_has_zero_residuals() {
    let p = gen_background_outliers(60, 0, 16, 1, 10).unwrap();
    let s = randomized_truncated_svd(&p.matrix, 1, 0).unwrap();
    for r in projection_residuals(&p.matrix, &s).unwrap() {
        assert!(r.abs() < 1e-12, "{r}");
    }
}

#[test]
fn keeping_outliers_costs_nothing() {
    let p = gen_background_outliers(10, 2, 4, 2, 11).unwrap();
    let s = randomized_truncated_svd(&p.matrix, 2, 0).unwrap();
    let loss = surrogate_loss(&p.matrix, &s, &p.outlier_indices).unwrap();
    assert!(loss.abs() < 1e-12, "{loss}");
}

#[test]
fn ascending_scoring_skips_outliers() {
    let p = gen_background_outliers(60, 4, 16, 1, 12).unwrap();
    let cfg = CompressionConfig::new(1, 8).with_scoring(Scoring::ResidualAscending);
    let res = compress(&p.matrix, &cfg).unwrap();
    assert!(res
        .retained_indices
        .iter()
        .all(|i| !p.outlier_indices.contains(i)));
}

#[test]
fn oracle_agrees_on_small_instance() {
    let x = TokenMatrix::new(lrcp_core::rng::gaussian_matrix(
        8,
        5,
        &mut lrcp_core::rng::seeded(13),
    ))
    .unwrap();
    let s = randomized_truncated_svd(&x, 2, 0).unwrap();
    let scores = projection_residuals(&x, &s).unwrap();
    let (oracle, loss) = brute_force_best_subset(&x, &s, 3).unwrap();
    assert_eq!(
        oracle,
        select_top_k(&scores, 3, SelectOrder::Descending).unwrap()
    );
    assert_eq!(loss, surrogate_loss(&x, &s, &oracle).unwrap());
}

#[test]
fn full_budget_oracle() {
    let x = TokenMatrix::new(lrcp_core::rng::gaussian_matrix(
        6,
        4,
        &mut lrcp_core::rng::seeded(14),
    ))
    .unwrap();
    let s = randomized_truncated_svd(&x, 2, 0).unwrap();
    let (set, loss) = brute_force_best_subset(&x, &s, 6).unwrap();
    assert_eq!(set, (0..6).collect::<Vec<_>>());
    assert_eq!(loss, 0.0);
}

#[test]
fn noiseless_data_is_perfectly_stable() {
    let p = gen_low_rank_noise(200, 32, 3, &[5.0, 4.0, 3.0], 0.0, 15).unwrap();
    let rep = stability_random_dropout(&p.matrix, 3, 0.8, 10, 1).unwrap();
    for s in &rep.similarities {
        assert!((s - 1.0).abs() < 1e-8, "{s}");
    }
    let pruned =
        stability_under_pruning(&p.matrix, &CompressionConfig::new(3, 1), &[100, 40]).unwrap();
    for s in &pruned.similarities {
        assert!((s - 1.0).abs() < 1e-8, "{s}");
    }
}

#[test]
fn noisy_background_survives_dropout() {
    let spectrum = [40.0, 30.0, 20.0, 10.0];
    let sigma = sigma_for_relative_noise(&spectrum, 1024, 256, 0.05);
    let p = gen_low_rank_noise(1024, 256, 4, &spectrum, sigma, 16).unwrap();
    let rep = stability_random_dropout(&p.matrix, 4, 0.8, 20, 0).unwrap();
    assert!(rep.mean_similarity >= 0.9, "{}", rep.mean_similarity);
    assert!(rep
        .similarities
        .iter()
        .all(|s| (0.0..=1.0 + 1e-10).contains(s)));
}

#[test]
fn outlier_instance_survives_pruning() {
    let p = gen_background_outliers(120, 8, 32, 4, 17).unwrap();
    let n = p.matrix.n_tokens();
    let cfg = CompressionConfig::new(4, 1);
    let rep = stability_under_pruning(&p.matrix, &cfg, &[n / 2, n / 4]).unwrap();
    assert_eq!(rep.similarities.len(), 2);
    for s in rep.similarities {
        assert!(s >= 0.9, "{s}");
    }
}

#[test]
fn generators_are_reproducible() {
    let a = gen_low_rank_noise(30, 10, 2, &[2.0, 1.0], 0.1, 18).unwrap();
    let b = gen_low_rank_noise(30, 10, 2, &[2.0, 1.0], 0.1, 18).unwrap();
    assert_eq!(a, b);
    let c = gen_background_outliers(30, 3, 10, 2, 19).unwrap();
    let d = gen_background_outliers(30, 3, 10, 2, 19).unwrap();
    assert_eq!(c, d);
}
