import numpy as np
import pytest

from bcc.sampler import ChainConfig
from bcc.simulation import (alpha_recovery_study, check_generated, error_comparison_study,
                            generate_two_cluster_data, inclusion_probability_table, prior_sensitivity_study)

QUICK = ChainConfig(iterations=300, burn_in=100, keep_theta=False, seed=11)


def test_generator_full_adherence():
    data, C, L = generate_two_cluster_data(1.0, 3, 20, 1.5, np.random.default_rng(0))
    np.testing.assert_array_equal(L, np.tile(C, (3, 1)))
    np.testing.assert_array_equal(C, np.repeat([0, 1], 10))
    assert data.M == 3 and data.dims == [1, 1, 1]


def test_generator_frequencies():
    alpha, mu = 0.7, 1.5
    data, C, L = generate_two_cluster_data(alpha, 1, 100_000, mu, np.random.default_rng(1))
    agree = np.mean(L == C)
    assert abs(agree - alpha) < 3 * np.sqrt(alpha * (1 - alpha) / L.size)
    x = data.sources[0][:, 0][L[0] == 0]
    assert abs(x.mean() - mu) < 3 / np.sqrt(x.size)


def test_generator_domain_checks():
    rng = np.random.default_rng(0)
    for args in [(0.4, 2, 10, 1.0), (0.8, 2, 11, 1.0), (0.8, 0, 10, 1.0), (0.8, 2, 10, 0.0)]:
        with pytest.raises(ValueError):
            generate_two_cluster_data(*args, rng)


def test_check_generated_catches_bad_labels():
    data, C, L = generate_two_cluster_data(0.9, 2, 400, 1.5, np.random.default_rng(2))
    check_generated(data, C, L, 0.9, 1.5)
    with pytest.raises(AssertionError):
        check_generated(data, C, 1 - L, 0.9, 1.5)
    with pytest.raises(AssertionError):
        check_generated(data, C, L, 0.9, -1.5)


def test_alpha_recovery_records_and_determinism():
    a = alpha_recovery_study(reps=3, config=QUICK)
    assert a == alpha_recovery_study(reps=3, config=QUICK)
    assert a == alpha_recovery_study(reps=3, config=QUICK, n_jobs=2)
    assert [r["rep"] for r in a] == [0, 1, 2]
    for r in a:
        assert 0.5 <= r["true_alpha"] <= 1
        assert r["ci_low"] <= r["alpha_hat"] <= r["ci_high"]
        assert r["covered"] == int(r["ci_low"] <= r["true_alpha"] <= r["ci_high"])


def test_uniform_prior_cell_equals_recovery_study():
    rec = alpha_recovery_study(reps=2, config=QUICK)
    cell = prior_sensitivity_study([(1, 1)], reps=2, config=QUICK)
    assert [r["alpha_hat"] for r in rec] == [r["alpha_hat"] for r in cell]
    assert [r["true_alpha"] for r in rec] == [r["true_alpha"] for r in cell]


def test_concentrated_prior_dominates():
    recs = prior_sensitivity_study([(30000, 10000)], reps=6, config=QUICK)
    assert np.mean([abs(r["alpha_hat"] - 0.75) for r in recs]) < 0.05


def test_moderate_prior_tracks_truth():
    cfg = ChainConfig(iterations=500, burn_in=100, keep_theta=False, seed=3)
    recs = prior_sensitivity_study([(5, 5)], reps=25, config=cfg)
    r = np.corrcoef([x["true_alpha"] for x in recs], [x["alpha_hat"] for x in recs])[0, 1]
    assert r > 0.8


def test_prior_grid_validation():
    with pytest.raises(ValueError):
        prior_sensitivity_study([(0, 1)], reps=1, config=QUICK)


def test_error_comparison_records():
    recs = error_comparison_study(M=3, reps=2, config=QUICK)
    for r in recs:
        for key in ("err_separate", "err_joint", "err_dependent", "err_bcc"):
            assert 0 <= r[key] <= 0.5
    assert recs == error_comparison_study(M=3, reps=2, config=QUICK)
    with pytest.raises(ValueError):
        error_comparison_study(M=4, reps=1, config=QUICK)


def test_inclusion_table():
    pi = np.array([0.35, 0.25, 0.15, 0.1, 0.08, 0.05, 0.02, 0, 0, 0])
    table = inclusion_probability_table(pi, [1.0, 0.95, 0.75, 0.1], K=10)
    assert table.shape == (10, 4)
    np.testing.assert_allclose(table[:, 0], pi)
    np.testing.assert_allclose(table[:, 3], 0.1, rtol=1e-14)
    np.testing.assert_allclose(table.sum(axis=0), 1.0, atol=1e-12)
    # empty overall clusters are reachable from a source whenever alpha < 1
    assert np.all(table[7:, 1:] > 0)
    with pytest.raises(ValueError):
        inclusion_probability_table(pi, [0.5], K=9)
