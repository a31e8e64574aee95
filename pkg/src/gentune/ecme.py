"""Closed-form conditional-maximization update for a penalty hyper-parameter.

With coefficients beta, scales sigma, bridge exponent alpha, and an
inverse-gamma prior (shape a, rate b) on nu^{-alpha}, the update is

    nu^{-alpha} <- (b + sum_j |beta_j / sigma_j|^alpha) / (a - 1 + k/alpha).

Only this update is implemented; the demo driver pairs it with a generic
penalized least-squares refit of beta, which is illustrative rather than a
faithful reproduction of the full hinge-loss alternation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .ridge import Dataset, solve_weighted_ridge
from .weights import ones_draw


@dataclass(frozen=True)
class EcmeState:
    beta: np.ndarray
    sigma: np.ndarray
    alpha: float
    a: float
    b: float
    nu_inv_alpha: float

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", sigma)
        if beta.shape != sigma.shape or beta.ndim != 1:
            raise DomainError("beta and sigma must be vectors of equal length")
        if np.any(sigma <= 0):
            raise DomainError("sigma entries must be positive")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.a <= 1:
            raise DomainError("need a > 1 for a positive update denominator")
        if self.b <= 0 or self.nu_inv_alpha <= 0:
            raise DomainError("b and nu^(-alpha) must be positive")


def nu_update(state: EcmeState) -> float:
    """One conditional-maximization step for nu^{-alpha}; strictly positive."""
    k = state.beta.size
    denom = state.a - 1.0 + k / state.alpha
    if denom <= 0:
        raise DomainError("update denominator a - 1 + k/alpha must be positive")
    num = state.b + float(np.sum(np.abs(state.beta / state.sigma) ** state.alpha))
    return num / denom


def ecme_demo(data: Dataset, alpha: float = 2.0, a: float = 3.0, b: float = 2.0,
              iters: int = 100, tol: float = 1e-8):
    """Alternate the nu-update with a ridge refit of beta on a small problem.

    Returns (final state, number of iterations, trace of nu^{-alpha} values).
    The refit uses the squared-error inner step with penalty nu^{-alpha}/n,
    standing in for the hinge-loss step of the full alternation.
    """
    sigma = np.ones(data.p)
    state = EcmeState(beta=np.zeros(data.p), sigma=sigma, alpha=alpha,
                      a=a, b=b, nu_inv_alpha=1.0)
    trace = [state.nu_inv_alpha]
    it = 0
    for it in range(1, iters + 1):
        lam = state.nu_inv_alpha / data.n
        beta = solve_weighted_ridge(data, ones_draw(data.n), lam).theta
        state = replace(state, beta=beta)
        nu_new = nu_update(state)
        delta = abs(nu_new - state.nu_inv_alpha)
        state = replace(state, nu_inv_alpha=nu_new)
        trace.append(nu_new)
        if delta <= tol:
            break
    return state, it, np.array(trace)
