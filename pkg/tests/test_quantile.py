import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gentune.errors import DomainError
from gentune.quantile import (QuantileConfig, check_loss, envelope_weight,
                              irls_quantile, penalized_objective,
                              working_response)
from gentune.ridge import Dataset
from gentune.weights import ones_draw

from conftest import make_ar1_dataset
from oracles import quantile_exact_oracle, quantile_subgradient_oracle


def test_check_loss_values():
    assert check_loss(0.0, 0.3) == 0.0
    assert check_loss(-2.0, 0.5) == 2.0
    assert abs(check_loss(1.0, 0.9) - 1.8) < 1e-15


@given(st.floats(-10, 10), st.floats(0.01, 0.99))
@settings(max_examples=200, deadline=None)
def test_check_loss_nonnegative(r, q):
    assert check_loss(r, q) >= 0.0


def test_check_loss_rejects_bad_q():
    with pytest.raises(DomainError):
        check_loss(1.0, 0.0)
    with pytest.raises(DomainError):
        check_loss(1.0, 1.0)


def test_envelope_weight_values():
    assert envelope_weight(2.0, 1e-6) == 0.5
    assert envelope_weight(-0.25, 1e-6) == 4.0
    assert envelope_weight(0.0, 1e-6) == 1e6


@given(st.floats(0.0, 50.0), st.floats(0.0, 50.0))
@settings(max_examples=200, deadline=None)
def test_envelope_weight_monotone_in_abs_residual(a, b):
    lo, hi = sorted((a, b))
    assert envelope_weight(hi, 1e-6) <= envelope_weight(lo, 1e-6) + 1e-15


def test_working_response_values():
    assert working_response(5.0, 3.0, 0.5) == 5.0
    assert abs(working_response(1.0, 2.0, 0.9) - 1.4) < 1e-15
    assert abs(working_response(0.0, 1.0, 0.1) - (-0.8)) < 1e-15


def test_working_response_requires_positive_weight():
    with pytest.raises(DomainError):
        working_response(1.0, 0.0, 0.5)


def test_config_validation():
    with pytest.raises(DomainError):
        QuantileConfig(q=1.2)
    with pytest.raises(DomainError):
        QuantileConfig(q=0.5, lam=-1.0)
    with pytest.raises(DomainError):
        QuantileConfig(q=0.5, eps_residual=0.0)


def test_location_median_recovery():
    data = Dataset(np.ones((5, 1)), np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
    res = irls_quantile(data, QuantileConfig(q=0.5, lam=0.0))
    assert abs(res.theta[0] - 3.0) < 1e-3
    # grid-search oracle over candidate locations confirms the minimum
    grid = np.linspace(0, 6, 6001)
    vals = [penalized_objective(np.array([g]), data,
                                QuantileConfig(q=0.5, lam=0.0), ones_draw(5))
            for g in grid]
    assert abs(grid[int(np.argmin(vals))] - 3.0) < 1e-3


def test_location_upper_quantile_recovery():
    y = np.arange(1.0, 11.0)
    data = Dataset(np.ones((10, 1)), y)
    res = irls_quantile(data, QuantileConfig(q=0.9, lam=0.0))
    # any point of [y_(9), y_(10)] minimizes; one order-statistic gap slack
    assert 8.0 <= res.theta[0] <= 10.0
    grid = np.linspace(0, 12, 12001)
    vals = [penalized_objective(np.array([g]), data,
                                QuantileConfig(q=0.9, lam=0.0), ones_draw(10))
            for g in grid]
    best = grid[int(np.argmin(vals))]
    assert abs(res.objective
               - penalized_objective(np.array([best]), data,
                                     QuantileConfig(q=0.9, lam=0.0),
                                     ones_draw(10))) < 1e-6


def test_matches_subgradient_oracle_small_instance():
    data = make_ar1_dataset(70, n=30, p=3)
    cfg = QuantileConfig(q=0.5, lam=1e-9)
    res = irls_quantile(data, cfg)
    _, f_oracle = quantile_subgradient_oracle(data, cfg, ones_draw(30))
    assert abs(res.objective - f_oracle) / f_oracle < 1e-4


def test_matches_exact_convex_oracle():
    data = make_ar1_dataset(71, n=25, p=3)
    for q, lam in ((0.1, 0.0), (0.5, 0.01), (0.9, 0.001)):
        cfg = QuantileConfig(q=q, lam=lam)
        res = irls_quantile(data, cfg)
        _, f_star = quantile_exact_oracle(data, cfg, ones_draw(25))
        assert abs(res.objective - f_star) / max(f_star, 1e-12) < 1e-4


def test_objective_trace_monotone():
    data = make_ar1_dataset(72, n=40, p=4)
    res = irls_quantile(data, QuantileConfig(q=0.3, lam=0.005))
    diffs = np.diff(res.objective_trace)
    assert np.all(diffs <= 1e-10)


def test_lad_equivalence_at_median():
    # q = 0.5 check loss is 2x absolute loss, so the minimizer matches LAD
    data = make_ar1_dataset(73, n=30, p=3)
    cfg = QuantileConfig(q=0.5, lam=0.0)
    res = irls_quantile(data, cfg)
    theta_star, _ = quantile_exact_oracle(data, cfg, ones_draw(30))
    lad_irls = np.mean(np.abs(data.y - data.X @ res.theta))
    lad_star = np.mean(np.abs(data.y - data.X @ theta_star))
    assert abs(lad_irls - lad_star) / lad_star < 1e-4


def test_outer_weights_enter_objective():
    data = make_ar1_dataset(74, n=20, p=2)
    w = ones_draw(20)
    heavy = type(w)(np.where(np.arange(20) < 10, 5.0, 0.2), 1.0)
    cfg = QuantileConfig(q=0.5, lam=0.01)
    res_plain = irls_quantile(data, cfg)
    res_heavy = irls_quantile(data, cfg, heavy)
    assert not np.allclose(res_plain.theta, res_heavy.theta)
    _, f_star = quantile_exact_oracle(data, cfg, heavy)
    assert abs(res_heavy.objective - f_star) / f_star < 1e-4


def test_weight_size_mismatch():
    data = make_ar1_dataset(75, n=10, p=2)
    with pytest.raises(DomainError):
        irls_quantile(data, QuantileConfig(q=0.5), ones_draw(9))
