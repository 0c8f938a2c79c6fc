"""Smoke test for the lrcp extension module. Run after `maturin develop`."""

import math
import os
import tempfile

import lrcp


def main():
    x, truth = lrcp.gen_low_rank_noise(200, 24, [8.0, 5.0, 3.0], sigma=0.01, seed=1)
    assert x.shape == (200, 24)

    result = lrcp.compress(x, 3, 32, seed=0)
    assert result.output.shape == (32, 24)
    assert len(result.retained_indices) == 32
    assert result.retained_indices == sorted(result.retained_indices)
    assert len(result.assignments) == 200 - 32
    assert lrcp.principal_angle_similarity(result.subspace, truth) > 0.999

    scores = lrcp.projection_residuals(x, result.subspace)
    top = lrcp.select_top_k(scores, 32)
    assert top == result.retained_indices
    loss = lrcp.surrogate_loss(x, result.subspace, top)
    assert math.isclose(loss, result.surrogate_loss, rel_tol=1e-12)

    plain = lrcp.compress(x, 3, 32, merge=False)
    rows = x.to_list()
    assert plain.output.to_list() == [rows[i] for i in plain.retained_indices]

    report = lrcp.explained_variance_spectrum(x, variances=[95.0])
    assert report.rank_at["95"] == 3

    stability = lrcp.stability_random_dropout(x, 3, 0.5, trials=5, seed=2)
    assert stability.mean_similarity > 0.99

    plan = lrcp.make_staged_plan(576, ["1/6", "1/3"], 32, 16)
    assert plan.keeps == [96, 32]
    assert round(100 * plan.average_retention, 1) == 11.1

    outliers, planted = lrcp.gen_background_outliers(60, 4, 16, 2, seed=3)
    kept = lrcp.compress(outliers, 2, 4).retained_indices
    assert kept == planted

    small = lrcp.TokenMatrix([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0], [3.0, 0.1]])
    basis = lrcp.randomized_truncated_svd(small, 1)
    best, best_loss = lrcp.brute_force_best_subset(small, basis, 2)
    assert math.isclose(best_loss, lrcp.surrogate_loss(small, basis, best))

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "x.npy")
        small.save(path)
        assert lrcp.TokenMatrix.load(path).to_list() == small.to_list()

    try:
        lrcp.compress(small, 1, 10)
    except lrcp.LrcpError:
        pass
    else:
        raise AssertionError("budget above N was accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
