import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gentune.errors import DomainError
from gentune.ridge import solve_weighted_ridge
from gentune.weights import (WeightDraw, WeightKind, WeightLaw, ones_draw,
                             sample, sample_matrix, weights_from_uniform)
from gentune.rng import derive_rng

from conftest import make_ar1_dataset


def test_from_uniform_all_ones_gives_zero_weights():
    w = weights_from_uniform(np.ones(3))
    assert np.array_equal(w.obs_weights, np.zeros(3))
    assert w.penalty_weight == 1.0


def test_from_uniform_analytic_logs():
    w = weights_from_uniform(np.exp([-1.0, -2.0, -3.0]))
    assert np.allclose(w.obs_weights, [1.0, 2.0, 3.0], atol=1e-12)


def test_from_uniform_rejects_out_of_range():
    with pytest.raises(DomainError):
        weights_from_uniform([0.5, 0.0])
    with pytest.raises(DomainError):
        weights_from_uniform([0.5, 1.5])
    with pytest.raises(DomainError):
        weights_from_uniform([-0.1])


def test_from_uniform_monte_carlo_mean():
    # ln(1/U) is Exp(1); its mean is 1
    u = 1.0 - derive_rng(7).random(100_000)
    w = weights_from_uniform(u)
    assert abs(w.obs_weights.mean() - 1.0) < 0.01


def test_ones_law_constant():
    w = sample(WeightLaw(WeightKind.ONES, 4), seed=123)
    assert np.array_equal(w.obs_weights, np.ones(4))
    assert w.penalty_weight == 1.0


def test_multinomial_support():
    w = sample(WeightLaw(WeightKind.MULTINOMIAL, 5), seed=9)
    assert np.array_equal(w.obs_weights, np.round(w.obs_weights))
    assert w.obs_weights.sum() == 5
    assert np.all(w.obs_weights >= 0)


def test_dirichlet_sums_to_n_exactly():
    law = WeightLaw(WeightKind.DIRICHLET, 17)
    for s in range(200):
        w = sample(law, seed=s)
        assert abs(w.obs_weights.sum() - 17) < 1e-9


def test_dirichlet_coordinate_mean():
    # scaled symmetric Dirichlet has unit coordinate means
    W, _ = sample_matrix(WeightLaw(WeightKind.DIRICHLET, 3), derive_rng(3), 100_000)
    assert np.allclose(W.mean(axis=0), 1.0, atol=0.02)


def test_sampling_is_pure_in_law_and_seed():
    law = WeightLaw(WeightKind.WBB, 32)
    a = sample(law, seed=42)
    b = sample(law, seed=42)
    assert np.array_equal(a.obs_weights, b.obs_weights)
    c = sample(law, seed=43)
    assert not np.array_equal(a.obs_weights, c.obs_weights)


def test_exponential_moments():
    W, _ = sample_matrix(WeightLaw(WeightKind.WBB, 100), derive_rng(11), 1000)
    flat = W.ravel()
    assert abs(flat.mean() - 1.0) < 0.01
    assert abs(flat.var() - 1.0) < 0.05


def test_randomized_penalty_weight():
    law = WeightLaw(WeightKind.WBB, 8, randomize_penalty=True)
    draws = [sample(law, seed=s).penalty_weight for s in range(500)]
    assert all(d > 0 for d in draws)
    assert abs(np.mean(draws) - 1.0) < 0.15


def test_ones_draw_matches_unweighted_solver_inputs():
    # unit weights must reproduce the unweighted normal equations bitwise
    data = make_ar1_dataset(5, n=20, p=4)
    w = ones_draw(20)
    weighted = data.X.T @ (w.obs_weights[:, None] * data.X)
    unweighted = data.X.T @ (np.ones(20)[:, None] * data.X)
    assert np.array_equal(weighted, unweighted)
    sol = solve_weighted_ridge(data, w, 0.3)
    ref = np.linalg.solve(data.X.T @ data.X + 20 * 0.3 * np.eye(4),
                          data.X.T @ data.y)
    assert np.max(np.abs(sol.theta - ref)) < 1e-12


def test_weight_draw_validation():
    with pytest.raises(DomainError):
        WeightDraw(np.array([1.0, -0.5]))
    with pytest.raises(DomainError):
        WeightDraw(np.array([1.0, np.inf]))
    with pytest.raises(DomainError):
        WeightDraw(np.array([1.0]), penalty_weight=-1.0)


def test_law_validation():
    with pytest.raises(DomainError):
        WeightLaw(WeightKind.ONES, 0)


@given(st.integers(min_value=0, max_value=2**63 - 1))
@settings(max_examples=25, deadline=None)
def test_sample_matrix_matches_law_support(seed):
    law = WeightLaw(WeightKind.DIRICHLET, 6)
    W, omega0 = sample_matrix(law, derive_rng(seed), 3)
    assert W.shape == (3, 6)
    assert np.all(W >= 0)
    assert np.allclose(W.sum(axis=1), 6.0, atol=1e-9)
    assert np.array_equal(omega0, np.ones(3))


def test_config_names_round_trip():
    for name in ("ones", "wbb", "multinomial", "dirichlet"):
        assert WeightLaw(WeightKind(name), 3).kind.value == name
