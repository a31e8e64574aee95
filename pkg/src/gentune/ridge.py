"""Weighted ridge regression in closed form, plus the GCV tuning criterion.

The objective is

    L(theta; w, lam) = (1/n) * sum_i w_i (y_i - x_i' theta)^2
                       + lam * w0 * ||theta||^2

with minimizer theta = (X'WX + n*lam*w0*I)^{-1} X'Wy. The 1/n data-fit
scaling is part of the contract: it puts the n*lam factor into the normal
equations, and lambda values are only comparable under this convention.

For p > n, hat-matrix and GCV quantities are computed from the n x n Gram
matrix XX' instead of the p x p covariance (the two are equal by the
push-through identity).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSmootherError, DomainError, SingularSystemError
from .weights import WeightDraw

# Per-thread tally of closed-form solves; lets callers verify that
# label-free training paths really perform zero solves, and stays exact
# when replications run concurrently.
_SOLVES = threading.local()


def solve_count() -> int:
    return getattr(_SOLVES, "count", 0)


def _bump_solve_count() -> None:
    _SOLVES.count = solve_count() + 1


@dataclass(frozen=True)
class Dataset:
    """A fixed design matrix and response vector."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DomainError("X must be a non-empty n x p matrix")
        if y.shape != (X.shape[0],):
            raise DomainError("y must be a length-n vector")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DomainError("dataset contains non-finite entries")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def rows(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])


@dataclass(frozen=True)
class RidgeSolution:
    theta: np.ndarray
    lam: float
    weights: WeightDraw


def _spd_solve(M: np.ndarray, b: np.ndarray, allow_fallback: bool) -> np.ndarray:
    """Solve M x = b for symmetric positive (semi-)definite M.

    Cholesky on the common path; rank-revealing least squares as fallback.
    """
    try:
        c, low = scipy.linalg.cho_factor(M, check_finite=False)
        return scipy.linalg.cho_solve((c, low), b, check_finite=False)
    except scipy.linalg.LinAlgError:
        if not allow_fallback:
            raise SingularSystemError(
                "normal equations are singular with lambda = 0"
            ) from None
        sol, _, _, _ = np.linalg.lstsq(M, b, rcond=None)
        return sol


def solve_weighted_ridge(data: Dataset, w: WeightDraw, lam: float,
                         n_norm: int | None = None) -> RidgeSolution:
    """Exact minimizer of the weighted ridge objective.

    ``n_norm`` overrides the 1/n data-fit normalization (defaults to the
    number of rows); cross-validation refits pass the full-sample n here so
    zero-weighted rows leave the penalty scale unchanged.
    """
    if w.n != data.n:
        raise DomainError("weight vector length does not match data")
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    n = data.n if n_norm is None else int(n_norm)
    lam_eff = lam * w.penalty_weight

    Xw = data.X * w.obs_weights[:, None]
    A = data.X.T @ Xw
    b = Xw.T @ data.y
    M = A + (n * lam_eff) * np.eye(data.p)
    theta = _spd_solve(M, b, allow_fallback=lam_eff > 0)
    _bump_solve_count()

    resid = np.max(np.abs(M @ theta - b))
    if not np.isfinite(resid) or resid > 1e-8 * (1.0 + np.max(np.abs(b))):
        raise SingularSystemError(
            f"normal-equations residual {resid:.3e} exceeds tolerance"
        )
    return RidgeSolution(theta=theta, lam=float(lam), weights=w)


def _hat_primal(X: np.ndarray, nlam: float) -> np.ndarray:
    p = X.shape[1]
    M = X.T @ X + nlam * np.eye(p)
    return X @ _spd_solve(M, X.T, allow_fallback=False)


def _hat_dual(X: np.ndarray, nlam: float) -> np.ndarray:
    # A = XX'(XX' + n*lam*I)^{-1}; the two factors commute, so solving
    # (G + n*lam*I) Z = G and transposing gives A.
    G = X @ X.T
    M = G + nlam * np.eye(X.shape[0])
    return _spd_solve(M, G, allow_fallback=False).T


def hat_matrix(data: Dataset, lam: float, mode: str = "auto") -> np.ndarray:
    """Smoother matrix A(lam) mapping y to ridge fitted values (unit weights).

    mode "auto" picks the p x p path when p <= n and the n x n Gram path
    otherwise; "primal"/"dual" force a path (the results agree to roundoff).
    """
    if lam <= 0:
        raise DomainError("hat_matrix requires lambda > 0")
    if mode == "auto":
        mode = "dual" if data.p > data.n else "primal"
    if mode == "primal":
        return _hat_primal(data.X, data.n * lam)
    if mode == "dual":
        return _hat_dual(data.X, data.n * lam)
    raise DomainError(f"unknown hat-matrix mode {mode!r}")


def gcv_score(data: Dataset, lam: float, mode: str = "auto") -> float:
    """Generalized cross-validation score

        V(lam) = (1/n) ||(I - A)y||^2 / [(1/n) tr(I - A)]^2.
    """
    A = hat_matrix(data, lam, mode=mode)
    n = data.n
    resid = data.y - A @ data.y
    denom_tr = n - float(np.trace(A))
    if denom_tr <= 1e-12:
        raise DegenerateSmootherError(
            f"tr(I - A) = {denom_tr:.3e}; smoother interpolates at lambda={lam}"
        )
    return float((resid @ resid) / n / (denom_tr / n) ** 2)


@dataclass(frozen=True)
class GridSelection:
    """Result of minimizing a criterion over a lambda grid."""

    lam_hat: float
    grid: np.ndarray
    values: np.ndarray       # NaN where evaluation failed
    skipped: tuple[int, ...] # indices of failed grid points


def _validate_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise DomainError("grid must be a non-empty 1-d vector")
    if np.any(g <= 0):
        raise DomainError("grid points must be positive")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly increasing")
    return g


def select_on_grid(grid, evaluate) -> GridSelection:
    """Minimize ``evaluate(lam)`` over a grid; ties break toward larger lam.

    Grid points where evaluation raises are skipped and recorded.
    """
    g = _validate_grid(grid)
    values = np.full(g.size, np.nan)
    skipped = []
    for i, lam in enumerate(g):
        try:
            values[i] = evaluate(float(lam))
        except (DegenerateSmootherError, SingularSystemError):
            skipped.append(i)
    if np.all(np.isnan(values)):
        raise DegenerateSmootherError("criterion failed at every grid point")
    best = np.nanmin(values)
    # ties toward larger lambda: last index attaining the minimum
    idx = int(np.nonzero(values == best)[0][-1])
    return GridSelection(lam_hat=float(g[idx]), grid=g, values=values,
                         skipped=tuple(skipped))


def gcv_select(data: Dataset, grid) -> GridSelection:
    return select_on_grid(grid, lambda lam: gcv_score(data, lam))


class WeightedRidgeObjective:
    """Value and theta-gradient of the weighted ridge objective.

    Used as the differentiable inner criterion in label-free generator
    training; ``h`` may be a bare lambda or any object with a ``lam`` field.
    ``n_norm`` follows the same convention as solve_weighted_ridge.
    """

    def __init__(self, data: Dataset, n_norm: int | None = None):
        self.data = data
        self.n_norm = data.n if n_norm is None else int(n_norm)

    @staticmethod
    def _lam(h) -> float:
        return float(getattr(h, "lam", h))

    def value(self, theta: np.ndarray, w: WeightDraw, h) -> float:
        lam = self._lam(h)
        r = self.data.y - self.data.X @ theta
        fit = float(w.obs_weights @ (r * r)) / self.n_norm
        return fit + lam * w.penalty_weight * float(theta @ theta)

    def grad_theta(self, theta: np.ndarray, w: WeightDraw, h) -> np.ndarray:
        lam = self._lam(h)
        r = self.data.y - self.data.X @ theta
        g = (-2.0 / self.n_norm) * (self.data.X.T @ (w.obs_weights * r))
        return g + (2.0 * lam * w.penalty_weight) * theta

    def exact_solution(self, w: WeightDraw, h) -> np.ndarray:
        return solve_weighted_ridge(self.data, w, self._lam(h),
                                    n_norm=self.n_norm).theta

    # Bulk paths over a batch of draws: Theta (B, p), W (B, n), lams (B,).

    def value_batch(self, Theta, W, lams, omega0=None) -> np.ndarray:
        omega0 = 1.0 if omega0 is None else omega0
        R = self.data.y[None, :] - Theta @ self.data.X.T
        fit = np.einsum("bn,bn->b", W, R * R) / self.n_norm
        return fit + lams * omega0 * np.einsum("bp,bp->b", Theta, Theta)

    def grad_batch(self, Theta, W, lams, omega0=None) -> np.ndarray:
        omega0 = 1.0 if omega0 is None else omega0
        R = self.data.y[None, :] - Theta @ self.data.X.T
        G = (-2.0 / self.n_norm) * ((W * R) @ self.data.X)
        return G + (2.0 * (lams * omega0))[:, None] * Theta
