"""Random observation weights driving the randomized objectives.

Four laws are supported, named as they appear in experiment configs:

* ``ones``        -- deterministic unit weights (the unrandomized objective)
* ``wbb``         -- i.i.d. Exp(1) weights, omega_i = ln(1/u_i)
* ``multinomial`` -- bootstrap counts, Multinomial(n, uniform)
* ``dirichlet``   -- symmetric Dirichlet scaled by n (sums to n exactly)

The exponential and Dirichlet laws share one primitive: Dirichlet draws are
normalized Exp(1) variates scaled by n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError
from .rng import derive_rng


class WeightKind(str, Enum):
    ONES = "ones"
    WBB = "wbb"
    MULTINOMIAL = "multinomial"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class WeightDraw:
    """One realized perturbation: per-observation weights plus a penalty weight."""

    obs_weights: np.ndarray
    penalty_weight: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.obs_weights, dtype=np.float64)
        object.__setattr__(self, "obs_weights", w)
        if w.ndim != 1 or w.size == 0:
            raise DomainError("obs_weights must be a non-empty 1-d vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("obs_weights must be finite and non-negative")
        if not (np.isfinite(self.penalty_weight) and self.penalty_weight >= 0):
            raise DomainError("penalty_weight must be finite and non-negative")

    @property
    def n(self) -> int:
        return self.obs_weights.size


@dataclass(frozen=True)
class WeightLaw:
    """A sampling law for WeightDraw.

    ``randomize_penalty`` draws the penalty weight as an extra Exp(1)
    coordinate; by default it stays at 1.
    """

    kind: WeightKind = WeightKind.ONES
    n: int = field(default=1)
    randomize_penalty: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        if self.n < 1:
            raise DomainError("weight law needs n >= 1")


def ones_draw(n: int) -> WeightDraw:
    """Unit weights; downstream solvers reduce to their unweighted form."""
    return WeightDraw(np.ones(n), 1.0)


def weights_from_uniform(u, penalty_weight: float = 1.0) -> WeightDraw:
    """Map uniforms in (0, 1] to exponential weights omega_i = ln(1/u_i)."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0) or np.any(u > 1):
        raise DomainError("uniform inputs must lie in (0, 1]")
    return WeightDraw(np.log(1.0 / u), penalty_weight)


def _exp_draws(rng: np.random.Generator, n: int) -> np.ndarray:
    # ln(1/u) with u in (0,1]; log1p keeps u -> 0+ safe.
    return -np.log1p(-rng.random(n))


def sample(law: WeightLaw, seed: int) -> WeightDraw:
    """Draw weights for ``law``; a pure function of (law, seed)."""
    rng = derive_rng(seed)
    n = law.n
    if law.kind is WeightKind.ONES:
        w = np.ones(n)
    elif law.kind is WeightKind.WBB:
        w = _exp_draws(rng, n)
    elif law.kind is WeightKind.MULTINOMIAL:
        w = rng.multinomial(n, np.full(n, 1.0 / n)).astype(np.float64)
    elif law.kind is WeightKind.DIRICHLET:
        e = _exp_draws(rng, n)
        w = e * (n / e.sum())
    else:  # pragma: no cover
        raise DomainError(f"unknown weight law {law.kind}")
    omega0 = float(_exp_draws(rng, 1)[0]) if law.randomize_penalty else 1.0
    return WeightDraw(w, omega0)


def sample_matrix(law: WeightLaw, rng: np.random.Generator, count: int):
    """Bulk path: ``count`` draws stacked as rows, pulled from one stream.

    Training loops and Monte Carlo evaluators use this to avoid per-draw
    generator construction; the stream itself is seed-derived, so results
    stay reproducible. Returns (weights (count, n), penalty_weights (count,)).
    """
    n = law.n
    if law.kind is WeightKind.ONES:
        W = np.ones((count, n))
    elif law.kind is WeightKind.WBB:
        W = -np.log1p(-rng.random((count, n)))
    elif law.kind is WeightKind.MULTINOMIAL:
        W = rng.multinomial(n, np.full(n, 1.0 / n), size=count).astype(np.float64)
    elif law.kind is WeightKind.DIRICHLET:
        E = -np.log1p(-rng.random((count, n)))
        W = E * (n / E.sum(axis=1, keepdims=True))
    else:  # pragma: no cover
        raise DomainError(f"unknown weight law {law.kind}")
    if law.randomize_penalty:
        omega0 = -np.log1p(-rng.random(count))
    else:
        omega0 = np.ones(count)
    return W, omega0
