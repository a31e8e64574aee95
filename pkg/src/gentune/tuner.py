"""Outer tuning loop: Monte Carlo criterion estimates through a trained map,
grid selection with common random numbers, and posterior-style uncertainty
summaries from weight-perturbed parameter draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CriterionEvalError, DomainError
from .generator import GeneratorModel, HyperConfig, generator_forward
from .ridge import Dataset, gcv_score
from .rng import array_hash, derive_rng, derive_seed
from .weights import WeightLaw, sample

# ---------------------------------------------------------------------------
# Tuning criteria (pure functions of (theta, data reference))


class ValidationMSE:
    kind = "validation_mse"

    def __init__(self, val: Dataset):
        self.val = val

    def evaluate(self, theta: np.ndarray, h: HyperConfig) -> float:
        r = self.val.y - self.val.X @ theta
        return float(r @ r) / self.val.n


class ValidationNLL:
    """Gaussian negative log-likelihood with known noise scale."""

    kind = "validation_nll"

    def __init__(self, val: Dataset, noise_sd: float):
        if noise_sd <= 0:
            raise DomainError("noise_sd must be positive")
        self.val = val
        self.noise_sd = float(noise_sd)

    def evaluate(self, theta: np.ndarray, h: HyperConfig) -> float:
        r = self.val.y - self.val.X @ theta
        s2 = self.noise_sd ** 2
        return float(0.5 * np.log(2 * np.pi * s2) + (r @ r) / (2 * s2 * self.val.n))


class GCVScoreCriterion:
    """Analytic risk surrogate; ignores theta and depends on h only."""

    kind = "gcv"

    def __init__(self, train: Dataset):
        self.train = train

    def evaluate(self, theta: np.ndarray, h: HyperConfig) -> float:
        return gcv_score(self.train, h.lam)


# ---------------------------------------------------------------------------
# Monte Carlo outer estimates


@dataclass(frozen=True)
class OuterEstimate:
    j_hat: float
    mc_std_err: float
    M: int


def _draw_weights(weight_law: WeightLaw, M: int, seed: int):
    return [sample(weight_law, derive_seed(seed, m)) for m in range(M)]


def _criterion_values(model, h, crit, ws) -> np.ndarray:
    vals = np.empty(len(ws))
    for m, w in enumerate(ws):
        try:
            vals[m] = crit.evaluate(generator_forward(model, w, h), h)
        except Exception as exc:
            raise CriterionEvalError(m, exc) from exc
    return vals


def estimate_outer(model: GeneratorModel, h: HyperConfig, crit,
                   weight_law: WeightLaw, M: int, seed: int) -> OuterEstimate:
    """J(h) ~ (1/M) sum_m U(g(omega_m, h), h) with fresh derived-seed draws."""
    if M < 2:
        raise DomainError("need M >= 2 draws")
    vals = _criterion_values(model, h, crit, _draw_weights(weight_law, M, seed))
    return OuterEstimate(j_hat=float(vals.mean()),
                         mc_std_err=float(vals.std(ddof=1) / np.sqrt(M)), M=M)


@dataclass(frozen=True)
class SelectionResult:
    h_hat: HyperConfig
    configs: tuple
    j_values: np.ndarray
    std_errs: np.ndarray
    draw_hashes: tuple  # one hash per shared omega draw (CRN contract)


def select_hyper(model: GeneratorModel, grid, crit, weight_law: WeightLaw,
                 M: int, seed: int) -> SelectionResult:
    """Minimize the Monte Carlo criterion over a hyper-config grid.

    All candidates are evaluated on the identical weight draws (common
    random numbers); the hashes of those draws are returned so callers can
    verify the contract. Ties break toward larger lambda.
    """
    grid = tuple(grid)
    if not grid:
        raise DomainError("hyper-config grid must be non-empty")
    if M < 2:
        raise DomainError("need M >= 2 draws")
    ws = _draw_weights(weight_law, M, seed)
    hashes = tuple(array_hash(w.obs_weights) for w in ws)
    J = np.empty(len(grid))
    S = np.empty(len(grid))
    for i, h in enumerate(grid):
        vals = _criterion_values(model, h, crit, ws)
        J[i] = vals.mean()
        S[i] = vals.std(ddof=1) / np.sqrt(M)
    best = J.min()
    ties = [grid[i] for i in np.nonzero(J == best)[0]]
    h_hat = max(ties, key=lambda h: h.lam)
    return SelectionResult(h_hat=h_hat, configs=grid, j_values=J,
                           std_errs=S, draw_hashes=hashes)


# ---------------------------------------------------------------------------
# Uncertainty summaries


@dataclass(frozen=True)
class PosteriorDrawSet:
    thetas: np.ndarray          # (M, p)
    hyper: HyperConfig
    seeds: tuple                # derived seed per draw

    def __post_init__(self):
        if self.thetas.ndim != 2 or self.thetas.shape[0] < 1:
            raise DomainError("need at least one draw")
        if not np.all(np.isfinite(self.thetas)):
            raise DomainError("draws contain non-finite values")


def posterior_draws(model: GeneratorModel, h_hat: HyperConfig,
                    weight_law: WeightLaw, M: int, seed: int) -> PosteriorDrawSet:
    """theta_m = g(omega_m, h_hat) for M fresh weight draws."""
    if M < 1:
        raise DomainError("need M >= 1 draws")
    seeds = tuple(derive_seed(seed, m) for m in range(M))
    thetas = np.stack([
        generator_forward(model, sample(weight_law, s), h_hat) for s in seeds
    ])
    return PosteriorDrawSet(thetas=thetas, hyper=h_hat, seeds=seeds)


class GaussianPredictive:
    """Linear-Gaussian predictive: y | x, theta ~ N(x' theta, noise_sd^2)."""

    def __init__(self, noise_sd: float):
        if noise_sd <= 0:
            raise DomainError("noise_sd must be positive")
        self.noise_sd = float(noise_sd)

    def mean(self, theta: np.ndarray, x: np.ndarray) -> float:
        return float(x @ theta)

    def variance(self, theta: np.ndarray, x: np.ndarray) -> float:
        return self.noise_sd ** 2

    def sample(self, theta, x, rng, size: int) -> np.ndarray:
        return self.mean(theta, x) + self.noise_sd * rng.standard_normal(size)


@dataclass(frozen=True)
class PredictiveSummary:
    mean: float
    variance: float
    quantiles: dict


def predictive_summary(draws: PosteriorDrawSet, x: np.ndarray, predictive_model,
                       quantile_levels=(0.05, 0.25, 0.5, 0.75, 0.95),
                       samples_per_component: int = 200,
                       seed: int = 0) -> PredictiveSummary:
    """Moments and quantiles of the equal-weight predictive mixture.

    Mean and variance use the exact mixture formulas from the component
    moments; quantiles pool ``samples_per_component`` draws per component
    and take empirical quantiles.
    """
    x = np.asarray(x, dtype=np.float64)
    M = draws.thetas.shape[0]
    means = np.array([predictive_model.mean(t, x) for t in draws.thetas])
    variances = np.array([predictive_model.variance(t, x) for t in draws.thetas])
    mix_mean = float(means.mean())
    mix_var = float(np.mean(variances + means ** 2) - mix_mean ** 2)
    pooled = np.concatenate([
        predictive_model.sample(draws.thetas[m], x, derive_rng(seed, 9, m),
                                samples_per_component)
        for m in range(M)
    ])
    qs = {float(q): float(np.quantile(pooled, q)) for q in quantile_levels}
    return PredictiveSummary(mean=mix_mean, variance=mix_var, quantiles=qs)


def predictive_pmf(draws: PosteriorDrawSet, x: np.ndarray, discrete_model) -> np.ndarray:
    """Monte Carlo averaged mass function (1/M) sum_m p(y | x, theta_m)."""
    pmfs = np.stack([discrete_model.pmf(t, x) for t in draws.thetas])
    return pmfs.mean(axis=0)
