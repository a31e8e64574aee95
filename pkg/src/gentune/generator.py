"""Parametric maps from (weights, hyper-parameters) to inner-problem optimizers.

Two training modes are provided. Supervised training regresses the map onto
precomputed optimizer labels; it pays one inner solve per training pair.
Criterion training never computes a label: each step draws fresh
(weights, hyper-parameters), evaluates the inner objective at the map's own
output, and backpropagates. The integrated prediction loss (IPL) measures
the mean squared distance between map outputs and exact optimizers under
the proposal distribution.

Trained models serialize to a small binary container: a magic tag, a JSON
header (family, input layout, dims, seed, config hash), then the flat
float64 parameter array. Round-trips are lossless.
"""

from __future__ import annotations

import json
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TrainingDivergedError
from .rng import derive_rng, derive_seed
from .weights import WeightDraw, WeightLaw, sample, sample_matrix

# ---------------------------------------------------------------------------
# Hyper-parameter configurations and proposal laws


@dataclass(frozen=True)
class HyperConfig:
    """h = (lambda, eta): penalty strength plus auxiliary loss parameters."""

    lam: float
    eta: tuple = ()

    def __post_init__(self):
        if self.lam <= 0:
            raise DomainError("lambda must be positive")
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))


@dataclass(frozen=True)
class LogUniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo < self.hi):
            raise DomainError("need 0 < lo < hi")

    def sample(self, rng) -> float:
        return float(np.exp(rng.uniform(np.log(self.lo), np.log(self.hi))))

    def sample_n(self, rng, count: int) -> np.ndarray:
        return np.exp(rng.uniform(np.log(self.lo), np.log(self.hi), count))

    def bounds(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class GridLaw:
    points: tuple

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if len(pts) == 0 or any(p <= 0 for p in pts):
            raise DomainError("grid must be non-empty and positive")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise DomainError("grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def sample(self, rng) -> float:
        return self.points[int(rng.integers(len(self.points)))]

    def sample_n(self, rng, count: int) -> np.ndarray:
        return np.asarray(self.points)[rng.integers(len(self.points), size=count)]

    def bounds(self):
        return (self.points[0], self.points[-1])


@dataclass(frozen=True)
class FixedLaw:
    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise DomainError("fixed value must be positive")

    def sample(self, rng) -> float:
        return self.value

    def sample_n(self, rng, count: int) -> np.ndarray:
        return np.full(count, self.value)

    def bounds(self):
        return (self.value, self.value)


@dataclass(frozen=True)
class HyperProposal:
    """Joint proposal over lambda and the auxiliary eta components."""

    lambda_law: object
    eta_laws: tuple = ()

    def sample(self, rng) -> HyperConfig:
        lam = self.lambda_law.sample(rng)
        eta = tuple(law.sample(rng) for law in self.eta_laws)
        return HyperConfig(lam=lam, eta=eta)

    def sample_batch(self, rng, count: int):
        """Stacked draws: (lams (count,), etas (count, n_eta))."""
        lams = self.lambda_law.sample_n(rng, count)
        etas = np.empty((count, len(self.eta_laws)))
        for j, law in enumerate(self.eta_laws):
            etas[:, j] = law.sample_n(rng, count)
        return lams, etas

    def lambda_bounds(self):
        return self.lambda_law.bounds()

    def eta_bounds(self):
        return tuple(law.bounds() for law in self.eta_laws)


def _norm_unit(x: float, lo: float, hi: float) -> float:
    """Map [lo, hi] to [-1, 1]; degenerate ranges map to 0."""
    if hi <= lo:
        return 0.0
    return 2.0 * (x - lo) / (hi - lo) - 1.0


# ---------------------------------------------------------------------------
# Input encoding


@dataclass(frozen=True)
class InputSpec:
    """Which of (omega, log lambda, eta) feed the map and how omega is encoded.

    Lambda always enters as log lambda normalized to [-1, 1] over the
    proposal support. omega encodings: "none", "full" (the centered weight
    vector scaled by 1/sqrt(n) so the block has unit-order norm),
    "quantiles" (k sorted-weight quantiles), "projections" (k fixed random
    unit projections).
    """

    n_obs: int
    omega_encoding: str = "full"
    omega_features: int = 8
    log_lambda_bounds: tuple = (1e-6, 1.0)
    eta_bounds: tuple = ()
    projection_seed: int = 0

    def __post_init__(self):
        if self.omega_encoding not in ("none", "full", "quantiles", "projections"):
            raise DomainError(f"unknown omega encoding {self.omega_encoding!r}")
        lo, hi = self.log_lambda_bounds
        if not (0 < lo <= hi):
            raise DomainError("lambda bounds must be positive with lo <= hi")

    @property
    def omega_dim(self) -> int:
        if self.omega_encoding == "none":
            return 0
        if self.omega_encoding == "full":
            return self.n_obs
        return self.omega_features

    @property
    def input_dim(self) -> int:
        return 1 + len(self.eta_bounds) + self.omega_dim

    def _projection_matrix(self) -> np.ndarray:
        rng = derive_rng(self.projection_seed, 7)
        P = rng.standard_normal((self.omega_features, self.n_obs))
        return P / np.linalg.norm(P, axis=1, keepdims=True)

    def encode(self, w: WeightDraw, h: HyperConfig) -> np.ndarray:
        """Raw model inputs [z, eta_norm..., omega_enc...] with z = norm log lam."""
        if w.n != self.n_obs:
            raise DomainError(
                f"weight draw has n={w.n}, input spec expects {self.n_obs}"
            )
        if len(h.eta) != len(self.eta_bounds):
            raise DomainError("eta length does not match input spec")
        lo, hi = self.log_lambda_bounds
        z = _norm_unit(np.log(h.lam), np.log(lo), np.log(hi))
        parts = [np.array([z])]
        for e, (elo, ehi) in zip(h.eta, self.eta_bounds):
            parts.append(np.array([_norm_unit(e, elo, ehi)]))
        if self.omega_encoding == "full":
            parts.append((w.obs_weights - 1.0) / np.sqrt(self.n_obs))
        elif self.omega_encoding == "quantiles":
            qs = np.linspace(0.0, 1.0, self.omega_features)
            parts.append(np.quantile(w.obs_weights, qs) - 1.0)
        elif self.omega_encoding == "projections":
            P = self._projection_matrix()
            parts.append(P @ (w.obs_weights - 1.0) / np.sqrt(self.n_obs))
        return np.concatenate(parts)

    def encode_batch(self, W: np.ndarray, lams: np.ndarray,
                     etas: np.ndarray | None = None) -> np.ndarray:
        """Vectorized encode over stacked draws (rows of W, entries of lams)."""
        B = W.shape[0]
        lo, hi = self.log_lambda_bounds
        llo, lhi = np.log(lo), np.log(hi)
        if lhi > llo:
            z = 2.0 * (np.log(lams) - llo) / (lhi - llo) - 1.0
        else:
            z = np.zeros(B)
        parts = [z[:, None]]
        if self.eta_bounds:
            if etas is None or etas.shape != (B, len(self.eta_bounds)):
                raise DomainError("eta batch does not match input spec")
            for j, (elo, ehi) in enumerate(self.eta_bounds):
                if ehi > elo:
                    parts.append(((2.0 * (etas[:, j] - elo) / (ehi - elo)) - 1.0)[:, None])
                else:
                    parts.append(np.zeros((B, 1)))
        if self.omega_encoding == "full":
            parts.append((W - 1.0) / np.sqrt(self.n_obs))
        elif self.omega_encoding == "quantiles":
            qs = np.linspace(0.0, 1.0, self.omega_features)
            parts.append(np.quantile(W, qs, axis=1).T - 1.0)
        elif self.omega_encoding == "projections":
            P = self._projection_matrix()
            parts.append((W - 1.0) @ P.T / np.sqrt(self.n_obs))
        return np.hstack(parts)


def default_input_spec(n_obs: int, proposal: HyperProposal,
                       omega: str | None = None, projection_seed: int = 0) -> InputSpec:
    """Full omega vector for small n, quantile summary beyond 256 rows."""
    if omega is None:
        omega = "full" if n_obs <= 256 else "quantiles"
    return InputSpec(n_obs=n_obs, omega_encoding=omega,
                     log_lambda_bounds=tuple(proposal.lambda_bounds()),
                     eta_bounds=tuple(proposal.eta_bounds()),
                     projection_seed=projection_seed)


# ---------------------------------------------------------------------------
# Model families


@dataclass
class GeneratorModel:
    """A trained (or initialized) map from encoded inputs to parameters.

    family "linear-features" applies a linear map to [1, z, z^2, inputs...];
    family "mlp" is a tanh network on the raw inputs.
    """

    family: str
    input_spec: InputSpec
    output_dim: int
    phi: np.ndarray
    hidden: tuple = ()
    activation: str = "tanh"
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def feature_dim(self) -> int:
        d = self.input_spec.input_dim
        if self.family == "linear-features":
            return d + 2  # intercept and z^2 on top of the raw inputs
        return d


def _linear_features(x: np.ndarray) -> np.ndarray:
    # x[0] is normalized log lambda; prepend intercept and its square
    if x.ndim == 1:
        return np.concatenate([[1.0, x[0] ** 2], x])
    return np.hstack([np.ones((x.shape[0], 1)), x[:, :1] ** 2, x])


def _mlp_shapes(d_in: int, hidden: tuple, d_out: int):
    dims = [d_in, *hidden, d_out]
    return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]


def _mlp_param_count(d_in: int, hidden: tuple, d_out: int) -> int:
    return sum(m * k + k for m, k in _mlp_shapes(d_in, hidden, d_out))


def _mlp_unpack(phi: np.ndarray, d_in: int, hidden: tuple, d_out: int):
    layers = []
    off = 0
    for m, k in _mlp_shapes(d_in, hidden, d_out):
        W = phi[off:off + m * k].reshape(m, k)
        off += m * k
        b = phi[off:off + k]
        off += k
        layers.append((W, b))
    return layers


def init_model(family: str, input_spec: InputSpec, output_dim: int,
               hidden: tuple = (), seed: int = 0) -> GeneratorModel:
    """Zero-initialized linear map, or Glorot-initialized tanh network."""
    if family == "linear-features":
        phi = np.zeros((input_spec.input_dim + 2) * output_dim)
    elif family == "mlp":
        if not hidden:
            raise DomainError("mlp family needs at least one hidden layer")
        rng = derive_rng(seed, 11)
        chunks = []
        for m, k in _mlp_shapes(input_spec.input_dim, hidden, output_dim):
            s = np.sqrt(6.0 / (m + k))
            chunks.append(rng.uniform(-s, s, m * k))
            chunks.append(np.zeros(k))
        phi = np.concatenate(chunks)
    else:
        raise DomainError(f"unknown generator family {family!r}")
    return GeneratorModel(family=family, input_spec=input_spec,
                          output_dim=output_dim, phi=phi, hidden=tuple(hidden),
                          seed=int(seed))


def _forward_batch(model: GeneratorModel, X_in: np.ndarray):
    """Batch forward pass; returns (outputs, caches for backprop)."""
    if model.family == "linear-features":
        F = _linear_features(X_in)
        W = model.phi.reshape(F.shape[1], model.output_dim)
        return F @ W, (F,)
    layers = _mlp_unpack(model.phi, model.input_spec.input_dim, model.hidden,
                         model.output_dim)
    acts = [X_in]
    a = X_in
    for i, (W, b) in enumerate(layers):
        z = a @ W + b
        a = np.tanh(z) if i < len(layers) - 1 else z
        acts.append(a)
    return a, (layers, acts)


def _backward_batch(model: GeneratorModel, caches, G_out: np.ndarray) -> np.ndarray:
    """Gradient of sum_b <G_out[b], output[b]> with respect to flat phi."""
    if model.family == "linear-features":
        (F,) = caches
        return (F.T @ G_out).ravel()
    layers, acts = caches
    grads = []
    g = G_out
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        a_prev = acts[i]
        gW = a_prev.T @ g
        gb = g.sum(axis=0)
        grads.append((gW, gb))
        if i > 0:
            g = (g @ W.T) * (1.0 - acts[i] ** 2)
    flat = []
    for gW, gb in reversed(grads):
        flat.append(gW.ravel())
        flat.append(gb)
    return np.concatenate(flat)


def generator_forward(model: GeneratorModel, w: WeightDraw,
                      h: HyperConfig) -> np.ndarray:
    """Evaluate the map at one (weights, hyper-config) pair."""
    x = model.input_spec.encode(w, h)
    out, _ = _forward_batch(model, x[None, :])
    theta = out[0]
    if not np.all(np.isfinite(theta)):
        raise DomainError("generator produced non-finite output")
    return theta


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class OptConfig:
    """Plain SGD with momentum and an optional cosine step-size decay."""

    learning_rate: float = 0.05
    momentum: float = 0.9
    batch_size: int = 10
    epochs: int = 200
    schedule: str = "cosine"
    lr_min_frac: float = 0.05

    def lr_at(self, step: int, total_steps: int) -> float:
        if self.schedule == "constant" or total_steps <= 1:
            return self.learning_rate
        t = min(step, total_steps - 1) / (total_steps - 1)
        lo = self.learning_rate * self.lr_min_frac
        return lo + 0.5 * (self.learning_rate - lo) * (1 + np.cos(np.pi * t))


@dataclass
class TrainReport:
    steps: int
    label_time_s: float
    train_time_s: float
    resamples: int
    loss_trace: np.ndarray


def _check_finite(loss: float, step: int, trace: list):
    if not np.isfinite(loss):
        raise TrainingDivergedError(step, trace[-5:] + [loss])


def draw_training_pairs(proposal: HyperProposal, weight_law: WeightLaw,
                        B: int, seed: int, inner_solver=None):
    """Sample B (weights, hyper) pairs; with a solver, also compute labels.

    Solver failures on a draw are resampled (the count is reported).
    """
    draws, labels = [], []
    resamples = 0
    attempt = 0
    while len(draws) < B:
        w = sample(weight_law, derive_seed(seed, 0, attempt))
        h = proposal.sample(derive_rng(seed, 1, attempt))
        attempt += 1
        if inner_solver is not None:
            try:
                labels.append(np.asarray(inner_solver(w, h), dtype=np.float64))
            except Exception:
                resamples += 1
                continue
        draws.append((w, h))
    return draws, labels, resamples


def train_supervised(model: GeneratorModel, proposal: HyperProposal,
                     weight_law: WeightLaw, inner_solver, B: int,
                     opt_cfg: OptConfig, seed: int) -> TrainReport:
    """Mode A: regress the map onto B precomputed optimizer labels.

    Minimizes the mean over pairs of ||label - g(omega, h)||^2 by SGD with
    momentum; label generation time and regression time are reported
    separately.
    """
    if B < 1:
        raise DomainError("need B >= 1 training pairs")
    t0 = time.perf_counter()
    draws, labels, resamples = draw_training_pairs(
        proposal, weight_law, B, seed, inner_solver=inner_solver)
    label_time = time.perf_counter() - t0

    X_in = np.stack([model.input_spec.encode(w, h) for w, h in draws])
    Y = np.stack(labels)

    t1 = time.perf_counter()
    rng = derive_rng(seed, 2)
    vel = np.zeros_like(model.phi)
    bs = min(opt_cfg.batch_size, B)
    steps_per_epoch = max(1, B // bs)
    total = opt_cfg.epochs * steps_per_epoch
    trace = []
    step = 0
    for _ in range(opt_cfg.epochs):
        perm = rng.permutation(B)
        for j in range(steps_per_epoch):
            idx = perm[j * bs:(j + 1) * bs]
            out, caches = _forward_batch(model, X_in[idx])
            diff = out - Y[idx]
            loss = float(np.sum(diff * diff)) / idx.size
            _check_finite(loss, step, trace)
            trace.append(loss)
            grad = _backward_batch(model, caches, 2.0 * diff / idx.size)
            vel = opt_cfg.momentum * vel - opt_cfg.lr_at(step, total) * grad
            model.phi = model.phi + vel
            step += 1
    return TrainReport(steps=step, label_time_s=label_time,
                       train_time_s=time.perf_counter() - t1,
                       resamples=resamples, loss_trace=np.array(trace))


def train_criterion(model: GeneratorModel, proposal: HyperProposal,
                    weight_law: WeightLaw, objective, steps: int,
                    opt_cfg: OptConfig, seed: int) -> TrainReport:
    """Mode B: minimize the inner objective at the map's own outputs.

    Each step draws a fresh batch of (omega, h), evaluates
    objective.value(g(omega, h), omega, h), and backpropagates
    objective.grad_theta through the map. No optimizer labels are computed.
    Objectives exposing value_batch/grad_batch get the vectorized path.
    """
    if steps < 1:
        raise DomainError("need steps >= 1")
    t0 = time.perf_counter()
    rng = derive_rng(seed, 3)
    w_rng = derive_rng(seed, 4)
    vel = np.zeros_like(model.phi)
    bs = opt_cfg.batch_size
    batched = hasattr(objective, "grad_batch")
    trace = []
    for step in range(steps):
        W, omega0 = sample_matrix(weight_law, w_rng, bs)
        lams, etas = proposal.sample_batch(rng, bs)
        X_in = model.input_spec.encode_batch(W, lams, etas)
        out, caches = _forward_batch(model, X_in)
        if batched:
            loss = float(np.mean(objective.value_batch(out, W, lams, omega0)))
            G = objective.grad_batch(out, W, lams, omega0) / bs
        else:
            loss = 0.0
            G = np.zeros_like(out)
            for j in range(bs):
                w = WeightDraw(W[j], float(omega0[j]))
                h = HyperConfig(lam=float(lams[j]), eta=tuple(etas[j]))
                loss += objective.value(out[j], w, h) / bs
                G[j] = objective.grad_theta(out[j], w, h) / bs
        _check_finite(loss, step, trace)
        trace.append(loss)
        grad = _backward_batch(model, caches, G)
        vel = opt_cfg.momentum * vel - opt_cfg.lr_at(step, steps) * grad
        model.phi = model.phi + vel
    return TrainReport(steps=steps, label_time_s=0.0,
                       train_time_s=time.perf_counter() - t0,
                       resamples=0, loss_trace=np.array(trace))


def ipl(model: GeneratorModel, proposal: HyperProposal, weight_law: WeightLaw,
        oracle, M: int, seed: int):
    """Integrated prediction loss: Monte Carlo E||g(omega,h) - oracle(omega,h)||^2.

    Returns (mean, standard error) over M fresh draws from seed-derived
    streams. The oracle is evaluated per draw; generator outputs are batched.
    """
    if M < 2:
        raise DomainError("need M >= 2 draws for a standard error")
    W, omega0 = sample_matrix(weight_law, derive_rng(seed, 5), M)
    lams, etas = proposal.sample_batch(derive_rng(seed, 6), M)
    X_in = model.input_spec.encode_batch(W, lams, etas)
    out, _ = _forward_batch(model, X_in)
    vals = np.empty(M)
    for m in range(M):
        w = WeightDraw(W[m], float(omega0[m]))
        h = HyperConfig(lam=float(lams[m]), eta=tuple(etas[m]))
        d = out[m] - np.asarray(oracle(w, h))
        vals[m] = d @ d
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(M))


class CountingSolver:
    """Wrap an inner solver and count how many times it is invoked."""

    def __init__(self, solver):
        self._solver = solver
        self.calls = 0

    def __call__(self, w, h):
        self.calls += 1
        return self._solver(w, h)


# ---------------------------------------------------------------------------
# Serialization

_MAGIC = b"GTMODEL1"
_FORMAT_VERSION = 1


def _config_hash(header: dict) -> str:
    blob = json.dumps(header, sort_keys=True).encode()
    return f"{zlib.crc32(blob):08x}"


def save_params(path, header: dict, params: np.ndarray) -> None:
    """Write the container: magic, u32 header length, JSON header, raw f64."""
    from pathlib import Path
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    params = np.ascontiguousarray(params, dtype="<f8")
    header = dict(header)
    header["format_version"] = _FORMAT_VERSION
    header["param_count"] = int(params.size)
    header["config_hash"] = _config_hash(
        {k: v for k, v in header.items() if k != "config_hash"})
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(np.uint32(len(blob)).tobytes())
        f.write(blob)
        f.write(params.tobytes())


def load_params(path):
    with open(path, "rb") as f:
        if f.read(len(_MAGIC)) != _MAGIC:
            raise DomainError(f"{path}: not a model container")
        (hlen,) = np.frombuffer(f.read(4), dtype=np.uint32)
        header = json.loads(f.read(int(hlen)).decode())
        params = np.frombuffer(f.read(), dtype="<f8").copy()
    if params.size != header.get("param_count"):
        raise DomainError(f"{path}: parameter payload truncated")
    return header, params


def save_model(model: GeneratorModel, path) -> None:
    header = {
        "family": model.family,
        "output_dim": model.output_dim,
        "hidden": list(model.hidden),
        "activation": model.activation,
        "seed": model.seed,
        "meta": model.meta,
        "input_spec": {
            "n_obs": model.input_spec.n_obs,
            "omega_encoding": model.input_spec.omega_encoding,
            "omega_features": model.input_spec.omega_features,
            "log_lambda_bounds": list(model.input_spec.log_lambda_bounds),
            "eta_bounds": [list(b) for b in model.input_spec.eta_bounds],
            "projection_seed": model.input_spec.projection_seed,
        },
    }
    save_params(path, header, model.phi)


def load_model(path) -> GeneratorModel:
    header, params = load_params(path)
    spec = header["input_spec"]
    input_spec = InputSpec(
        n_obs=spec["n_obs"],
        omega_encoding=spec["omega_encoding"],
        omega_features=spec["omega_features"],
        log_lambda_bounds=tuple(spec["log_lambda_bounds"]),
        eta_bounds=tuple(tuple(b) for b in spec["eta_bounds"]),
        projection_seed=spec["projection_seed"],
    )
    return GeneratorModel(family=header["family"], input_spec=input_spec,
                          output_dim=header["output_dim"], phi=params,
                          hidden=tuple(header["hidden"]),
                          activation=header["activation"],
                          seed=header["seed"], meta=header["meta"])
