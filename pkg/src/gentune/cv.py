"""K-fold cross-validation for the ridge family.

Fold refits are expressed as weighted solves on the full dataset with 0/1
indicator weights. Because the objective normalizes the data-fit term by the
full-sample n, a leave-one-out refit solves (X'X - x_i x_i' + n*lam*I), which
is exactly the system behind the classical LOO residual shortcut
r_i / (1 - A_ii); the identity is used as an oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ridge import Dataset, GridSelection, select_on_grid, solve_weighted_ridge
from .rng import derive_rng
from .weights import WeightDraw


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    K: int
    seed: int

    def train_weights(self, k: int) -> WeightDraw:
        """Indicator weights selecting the training rows of fold k."""
        return WeightDraw((self.fold_of != k).astype(np.float64))

    def val_indices(self, k: int) -> np.ndarray:
        return np.nonzero(self.fold_of == k)[0]


def kfold_split(n: int, K: int, seed: int) -> FoldAssignment:
    """Balanced random fold assignment; pure function of (n, K, seed)."""
    if K < 2 or K > n:
        raise DomainError(f"need 2 <= K <= n, got K={K}, n={n}")
    perm = derive_rng(seed, n, K).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[perm] = np.arange(n) % K
    return FoldAssignment(fold_of=fold_of, K=K, seed=int(seed))


def mse_criterion(theta: np.ndarray, X_val: np.ndarray, y_val: np.ndarray) -> float:
    r = y_val - X_val @ theta
    return float(r @ r) / y_val.size


def cv_risk(data: Dataset, lam: float, folds: FoldAssignment,
            criterion=mse_criterion) -> float:
    """Mean over folds of the validation criterion of the per-fold refit."""
    if folds.fold_of.size != data.n:
        raise DomainError("fold assignment does not match data size")
    scores = []
    for k in range(folds.K):
        sol = solve_weighted_ridge(data, folds.train_weights(k), lam)
        idx = folds.val_indices(k)
        scores.append(criterion(sol.theta, data.X[idx], data.y[idx]))
    return float(np.mean(scores))


def cv_select(data: Dataset, grid, folds: FoldAssignment,
              criterion=mse_criterion) -> GridSelection:
    return select_on_grid(grid, lambda lam: cv_risk(data, lam, folds, criterion))


def test_mse(theta: np.ndarray, test: Dataset) -> float:
    """Held-out mean squared error (1/n_test) ||y - X theta||^2."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (test.p,):
        raise DomainError(
            f"theta has length {theta.shape}, test design has p={test.p}"
        )
    return mse_criterion(theta, test.X, test.y)
