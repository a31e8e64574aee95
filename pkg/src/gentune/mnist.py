"""Desk-scale image-classification demo: an MLP trained from scratch and a
hypernetwork that maps a penalty strength to the full MLP weight vector.

All forward/backward passes are hand-written numpy. The hypernetwork keeps a
base parameter vector and, per layer, modulates it with a lambda-dependent
scalar gain plus a rank-1 direction; the modulation coefficients are
quadratic in the normalized log penalty. The gain path is what lets the
produced weights shrink as lambda grows, which a pure rank-1 offset cannot
express.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, TrainingDivergedError
from .generator import OptConfig, load_params, save_params
from .idx import (IMAGE_MAGIC, LABEL_MAGIC, IdxTensor, images_to_float,
                  labels_to_int, load_idx, write_idx)
from .rng import derive_rng
from .weights import WeightKind, WeightLaw

LOGIT_CLAMP = 30.0


# ---------------------------------------------------------------------------
# Plain MLP


@dataclass(frozen=True)
class MlpSpec:
    sizes: tuple = (784, 32, 10)
    activation: str = "relu"

    def __post_init__(self):
        if len(self.sizes) < 2:
            raise DomainError("need at least input and output sizes")
        if self.activation != "relu":
            raise DomainError("only relu hidden activations are supported")

    @property
    def layer_shapes(self):
        return [(self.sizes[i], self.sizes[i + 1])
                for i in range(len(self.sizes) - 1)]

    @property
    def param_count(self) -> int:
        return sum(m * k + k for m, k in self.layer_shapes)


def init_mlp_params(spec: MlpSpec, seed: int) -> np.ndarray:
    rng = derive_rng(seed, 21)
    chunks = []
    for m, k in spec.layer_shapes:
        s = np.sqrt(6.0 / (m + k))
        chunks.append(rng.uniform(-s, s, m * k))
        chunks.append(np.zeros(k))
    return np.concatenate(chunks)


def unpack_mlp(theta: np.ndarray, spec: MlpSpec):
    layers = []
    off = 0
    for m, k in spec.layer_shapes:
        W = theta[off:off + m * k].reshape(m, k)
        off += m * k
        b = theta[off:off + k]
        off += k
        layers.append((W, b))
    if off != theta.size:
        raise DomainError("parameter vector length does not match the spec")
    return layers


def mlp_logits(theta: np.ndarray, spec: MlpSpec, X: np.ndarray) -> np.ndarray:
    a = X
    layers = unpack_mlp(theta, spec)
    for i, (W, b) in enumerate(layers):
        z = a @ W + b
        a = np.maximum(z, 0.0) if i < len(layers) - 1 else z
    return np.clip(a, -LOGIT_CLAMP, LOGIT_CLAMP)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def mlp_loss_grad(theta: np.ndarray, spec: MlpSpec, X: np.ndarray,
                  y: np.ndarray, lam: float, sample_weights=None):
    """Cross-entropy (+ lam * ||theta||^2) and its gradient in flat form.

    ``sample_weights`` reweights per-example losses; the estimate stays
    unbiased for the weighted objective because the weights average to 1.
    """
    B = X.shape[0]
    sw = np.ones(B) if sample_weights is None else np.asarray(sample_weights)
    layers = unpack_mlp(theta, spec)
    acts = [X]
    pre = []
    a = X
    for i, (W, b) in enumerate(layers):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < len(layers) - 1 else z
        acts.append(a)
    raw_logits = acts[-1]
    logits = np.clip(raw_logits, -LOGIT_CLAMP, LOGIT_CLAMP)
    ls = _log_softmax(logits)
    ce = -ls[np.arange(B), y]
    loss = float(np.mean(sw * ce)) + lam * float(theta @ theta)

    probs = np.exp(ls)
    G = probs.copy()
    G[np.arange(B), y] -= 1.0
    G *= (sw / B)[:, None]
    G *= (np.abs(raw_logits) < LOGIT_CLAMP)  # clip derivative

    grads = []
    g = G
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        grads.append((acts[i].T @ g, g.sum(axis=0)))
        if i > 0:
            g = (g @ W.T) * (pre[i - 1] > 0)
    flat = np.concatenate([np.concatenate([gW.ravel(), gb])
                           for gW, gb in reversed(grads)])
    return loss, flat + 2.0 * lam * theta


def evaluate_classifier(theta: np.ndarray, spec: MlpSpec, X: np.ndarray,
                        y: np.ndarray, batch: int = 1000):
    """Mean cross-entropy (no penalty) and accuracy over a dataset."""
    total_ce = 0.0
    correct = 0
    for i in range(0, X.shape[0], batch):
        logits = mlp_logits(theta, spec, X[i:i + batch])
        ls = _log_softmax(logits)
        yy = y[i:i + batch]
        total_ce += float(-ls[np.arange(yy.size), yy].sum())
        correct += int((logits.argmax(axis=1) == yy).sum())
    n = X.shape[0]
    return total_ce / n, correct / n


def train_baseline(spec: MlpSpec, lam: float, X: np.ndarray, y: np.ndarray,
                   opt_cfg: OptConfig, steps: int, seed: int):
    """Standard SGD on the plain MLP at fixed lambda; 0 steps returns init."""
    theta = init_mlp_params(spec, seed)
    rng = derive_rng(seed, 22)
    vel = np.zeros_like(theta)
    trace = []
    for step in range(steps):
        idx = rng.integers(0, X.shape[0], opt_cfg.batch_size)
        loss, grad = mlp_loss_grad(theta, spec, X[idx], y[idx], lam)
        if not np.isfinite(loss):
            raise TrainingDivergedError(step, trace[-5:] + [loss])
        trace.append(loss)
        vel = opt_cfg.momentum * vel - opt_cfg.lr_at(step, steps) * grad
        theta = theta + vel
    return theta, np.array(trace)


# ---------------------------------------------------------------------------
# Hypernetwork


@dataclass
class HyperNet:
    """Base MLP parameters plus per-layer rank-1 modulation.

    The produced weights are the base weights plus a sum of rank-1 basis
    elements with coefficients quadratic in s (the normalized log penalty).
    Per layer there are k+1 such elements: the k base columns W0[:, j] e_j'
    (so each output unit carries a lambda-dependent gain, letting the map
    shrink or switch off units as the penalty grows) and one free outer
    product u v'. In matrix form, with gain vector gamma(s) = Gain_W phi(s):

        W(s) = W0 * (1 + gamma(s))' + (coef_W . phi(s)) * u v'
        b(s) = b0 * (1 + beta(s))   + (coef_b . phi(s)) * d

    with phi(s) = (1, s, s^2), extended by a scalar weight summary when
    ``use_omega_summary`` is set.
    """

    spec: MlpSpec
    lam_lo: float
    lam_hi: float
    use_omega_summary: bool = False
    params: dict = field(default_factory=dict)

    @property
    def feature_dim(self) -> int:
        return 4 if self.use_omega_summary else 3

    def features(self, lam: float, omega_summary: float = 0.0) -> np.ndarray:
        if lam < self.lam_lo * (1 - 1e-9) or lam > self.lam_hi * (1 + 1e-9):
            warnings.warn(
                f"lambda {lam:g} outside the training range "
                f"[{self.lam_lo:g}, {self.lam_hi:g}]", stacklevel=2)
        s = self.norm_log_lambda(lam)
        f = [1.0, s, s * s]
        if self.use_omega_summary:
            f.append(omega_summary)
        return np.array(f)

    def norm_log_lambda(self, lam: float) -> float:
        lo, hi = np.log(self.lam_lo), np.log(self.lam_hi)
        if hi <= lo:
            return 0.0
        return 2.0 * (np.log(lam) - lo) / (hi - lo) - 1.0

    def param_keys(self):
        keys = ["theta0"]
        for i in range(len(self.spec.layer_shapes)):
            keys += [f"gain_W{i}", f"coef_W{i}", f"u{i}", f"v{i}",
                     f"gain_b{i}", f"coef_b{i}", f"d{i}"]
        return keys

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.params[k].ravel() for k in self.param_keys()])

    def load_flat(self, flat: np.ndarray) -> None:
        off = 0
        for k in self.param_keys():
            size = self.params[k].size
            self.params[k] = flat[off:off + size].reshape(self.params[k].shape)
            off += size
        if off != flat.size:
            raise DomainError("flat vector does not match hypernet layout")


def init_hypernet(spec: MlpSpec, lam_lo: float, lam_hi: float, seed: int,
                  use_omega_summary: bool = False) -> HyperNet:
    if not (0 < lam_lo < lam_hi):
        raise DomainError("need 0 < lam_lo < lam_hi")
    hn = HyperNet(spec=spec, lam_lo=float(lam_lo), lam_hi=float(lam_hi),
                  use_omega_summary=use_omega_summary)
    rng = derive_rng(seed, 23)
    F = hn.feature_dim
    params = {"theta0": init_mlp_params(spec, seed)}
    for i, (m, k) in enumerate(spec.layer_shapes):
        params[f"gain_W{i}"] = np.zeros((k, F))
        params[f"coef_W{i}"] = np.zeros(F)
        params[f"u{i}"] = rng.standard_normal(m) / np.sqrt(m)
        params[f"v{i}"] = rng.standard_normal(k) / np.sqrt(k)
        params[f"gain_b{i}"] = np.zeros((k, F))
        params[f"coef_b{i}"] = np.zeros(F)
        params[f"d{i}"] = rng.standard_normal(k) / np.sqrt(k)
    hn.params = params
    return hn


def hypernet_forward(hn: HyperNet, lam: float,
                     omega_summary: float = 0.0) -> np.ndarray:
    """Assemble the full MLP parameter vector theta(lambda)."""
    phi = hn.features(lam, omega_summary)
    p = hn.params
    base = unpack_mlp(p["theta0"], hn.spec)
    out = []
    for i, (W0, b0) in enumerate(base):
        gW = 1.0 + p[f"gain_W{i}"] @ phi      # per output unit
        cW = p[f"coef_W{i}"] @ phi
        W = W0 * gW[None, :] + cW * np.outer(p[f"u{i}"], p[f"v{i}"])
        gb = 1.0 + p[f"gain_b{i}"] @ phi
        cb = p[f"coef_b{i}"] @ phi
        b = b0 * gb + cb * p[f"d{i}"]
        out.append(W.ravel())
        out.append(b)
    return np.concatenate(out)


def hypernet_loss_grad(hn: HyperNet, lam: float, X: np.ndarray, y: np.ndarray,
                       sample_weights=None, omega_summary: float = 0.0):
    """Loss at theta(lambda) and gradients for every hypernet parameter."""
    phi = hn.features(lam, omega_summary)
    p = hn.params
    theta = hypernet_forward(hn, lam, omega_summary)
    loss, g_theta = mlp_loss_grad(theta, hn.spec, X, y, lam, sample_weights)

    grads = {k: np.zeros_like(v) for k, v in p.items()}
    base = unpack_mlp(p["theta0"], hn.spec)
    g_layers = unpack_mlp(g_theta, hn.spec)
    g_theta0 = []
    for i, ((W0, b0), (GW, Gb)) in enumerate(zip(base, g_layers)):
        gW = 1.0 + p[f"gain_W{i}"] @ phi
        cW = p[f"coef_W{i}"] @ phi
        u, v, d = p[f"u{i}"], p[f"v{i}"], p[f"d{i}"]
        g_theta0.append((GW * gW[None, :]).ravel())
        grads[f"gain_W{i}"] = np.outer((GW * W0).sum(axis=0), phi)
        grads[f"coef_W{i}"] = float(u @ GW @ v) * phi
        grads[f"u{i}"] = cW * (GW @ v)
        grads[f"v{i}"] = cW * (GW.T @ u)
        gb = 1.0 + p[f"gain_b{i}"] @ phi
        cb = p[f"coef_b{i}"] @ phi
        g_theta0.append(Gb * gb)
        grads[f"gain_b{i}"] = np.outer(Gb * b0, phi)
        grads[f"coef_b{i}"] = float(Gb @ d) * phi
        grads[f"d{i}"] = cb * Gb
    grads["theta0"] = np.concatenate(g_theta0)
    return loss, grads


# Modulation coefficients aggregate gradient over whole columns, so their
# stable step size is below the base-weight one; clip guards rare spikes.
_COEF_LR_MULT = 0.03
_GRAD_CLIP = 25.0


def _group_lr_mult(key: str) -> float:
    return _COEF_LR_MULT if key.startswith(("gain_", "coef_")) else 1.0


def train_hypernet_criterion(hn: HyperNet, X: np.ndarray, y: np.ndarray,
                             weight_law: WeightLaw, opt_cfg: OptConfig,
                             steps: int, seed: int) -> np.ndarray:
    """Label-free training: each step draws a fresh lambda (log-uniform over
    the hypernet's range), evaluates weighted cross-entropy plus the
    lambda-scaled penalty through the assembled weights, and updates.
    Returns the loss trace; 0 steps leaves the hypernet unchanged.
    """
    rng = derive_rng(seed, 24)
    vel = {k: np.zeros_like(v) for k, v in hn.params.items()}
    trace = []
    log_lo, log_hi = np.log(hn.lam_lo), np.log(hn.lam_hi)
    for step in range(steps):
        lam = float(np.exp(rng.uniform(log_lo, log_hi)))
        idx = rng.integers(0, X.shape[0], opt_cfg.batch_size)
        sw = None
        omega_summary = 0.0
        if weight_law.kind is not WeightKind.ONES:
            from .rng import derive_seed
            from .weights import sample as sample_weights_law
            draw = sample_weights_law(
                WeightLaw(weight_law.kind, opt_cfg.batch_size),
                derive_seed(seed, 25, step))
            sw = draw.obs_weights
            omega_summary = float(sw.mean() - 1.0)
        loss, grads = hypernet_loss_grad(hn, lam, X[idx], y[idx], sw,
                                         omega_summary)
        if not np.isfinite(loss):
            raise TrainingDivergedError(step, trace[-5:] + [loss])
        trace.append(loss)
        gnorm = np.sqrt(sum(float(g @ g) if g.ndim == 1 else float(np.sum(g * g))
                            for g in grads.values()))
        scale = min(1.0, _GRAD_CLIP / gnorm) if gnorm > 0 else 1.0
        lr = opt_cfg.lr_at(step, steps)
        for k in hn.params:
            vel[k] = (opt_cfg.momentum * vel[k]
                      - lr * _group_lr_mult(k) * scale * grads[k])
            hn.params[k] = hn.params[k] + vel[k]
    return np.array(trace)


def tuning_curve(hn: HyperNet, X_val: np.ndarray, y_val: np.ndarray, grid):
    """One forward pass plus one validation pass per grid point."""
    rows = []
    for lam in grid:
        theta = hypernet_forward(hn, float(lam))
        val_loss, val_acc = evaluate_classifier(theta, hn.spec, X_val, y_val)
        rows.append({"lambda": float(lam), "val_loss": val_loss,
                     "val_acc": val_acc})
    return rows


def save_hypernet(hn: HyperNet, path) -> None:
    header = {
        "family": "hypernet-mlp",
        "sizes": list(hn.spec.sizes),
        "activation": hn.spec.activation,
        "lam_lo": hn.lam_lo,
        "lam_hi": hn.lam_hi,
        "use_omega_summary": hn.use_omega_summary,
        "layout": {k: list(hn.params[k].shape) for k in hn.param_keys()},
    }
    save_params(path, header, hn.flatten())


def load_hypernet(path) -> HyperNet:
    header, flat = load_params(path)
    if header.get("family") != "hypernet-mlp":
        raise DomainError(f"{path}: not a hypernet container")
    spec = MlpSpec(sizes=tuple(header["sizes"]), activation=header["activation"])
    hn = init_hypernet(spec, header["lam_lo"], header["lam_hi"], seed=0,
                       use_omega_summary=header["use_omega_summary"])
    hn.load_flat(flat)
    return hn


# ---------------------------------------------------------------------------
# Data loading and the synthetic desk fixture


def load_split(train_images, train_labels, test_images, test_labels,
               n_train: int, n_val: int, n_test: int):
    """Deterministic desk-scale split: the first n_train rows train, the next
    n_val validate, and the first n_test rows of the test files test."""
    Xtr_all = images_to_float(load_idx(train_images))
    ytr_all = labels_to_int(load_idx(train_labels))
    Xte_all = images_to_float(load_idx(test_images))
    yte_all = labels_to_int(load_idx(test_labels))
    if Xtr_all.shape[0] != ytr_all.shape[0] or Xte_all.shape[0] != yte_all.shape[0]:
        raise DataError("image/label counts disagree")
    if Xtr_all.shape[0] < n_train + n_val:
        raise DataError(
            f"need {n_train + n_val} training rows, file has {Xtr_all.shape[0]}")
    if Xte_all.shape[0] < n_test:
        raise DataError(f"need {n_test} test rows, file has {Xte_all.shape[0]}")
    return {
        "X_train": Xtr_all[:n_train], "y_train": ytr_all[:n_train],
        "X_val": Xtr_all[n_train:n_train + n_val],
        "y_val": ytr_all[n_train:n_train + n_val],
        "X_test": Xte_all[:n_test], "y_test": yte_all[:n_test],
    }


# Seven-segment digit geometry on a 28x28 canvas: inclusive (r0, r1, c0, c1)
# boxes per segment and the segment set lit for each digit class.
_SEGMENTS = {
    "A": (4, 6, 8, 20), "B": (5, 14, 19, 21), "C": (14, 23, 19, 21),
    "D": (22, 24, 8, 20), "E": (14, 23, 7, 9), "F": (5, 14, 7, 9),
    "G": (13, 15, 8, 20),
}
_DIGIT_SEGMENTS = ("ABCDEF", "BC", "ABGED", "ABGCD", "FGBC", "AFGCD",
                   "AFGECD", "ABC", "ABCDEFG", "ABCDFG")

# Jitter calibration: heavy pixel noise plus shear/shift makes a 32-unit MLP
# land near real-digit accuracy while strong over-regularization costs it
# several accuracy points.
_PIXEL_NOISE_SD = 95.0
_INTENSITY_RANGE = (150.0, 255.0)
_MAX_SHIFT = 2
_MAX_SHEAR = 0.18


def synthesize_digit_files(out_dir, n_train: int = 12000, n_test: int = 2000,
                           seed: int = 1234):
    """Write a deterministic digit-like IDX fixture and return the paths.

    Samples are sheared, shifted, intensity-jittered seven-segment glyphs
    under heavy pixel noise, stored exactly like the canonical digit corpus
    (big-endian IDX, image magic 0x803, label magic 0x801).
    """
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def render(count, stream):
        imgs = np.empty((count, 28, 28), dtype=np.uint8)
        labels = stream.integers(0, 10, count).astype(np.uint8)
        for i in range(count):
            canvas = np.zeros((28, 28))
            for s in _DIGIT_SEGMENTS[int(labels[i])]:
                r0, r1, c0, c1 = _SEGMENTS[s]
                canvas[r0:r1 + 1, c0:c1 + 1] = 1.0
            shear = stream.uniform(-_MAX_SHEAR, _MAX_SHEAR)
            sheared = np.zeros_like(canvas)
            for r in range(28):
                sheared[r] = np.roll(canvas[r], int(round(shear * (r - 14))))
            dx, dy = stream.integers(-_MAX_SHIFT, _MAX_SHIFT + 1, 2)
            img = np.roll(np.roll(sheared, dx, axis=0), dy, axis=1)
            img = img * stream.uniform(*_INTENSITY_RANGE)
            img = img + stream.standard_normal((28, 28)) * _PIXEL_NOISE_SD
            imgs[i] = np.clip(img, 0, 255).astype(np.uint8)
        return imgs, labels

    paths = {}
    for name, count, stream_key in (("train", n_train, 27), ("t10k", n_test, 28)):
        stream = derive_rng(seed, stream_key)
        imgs, labels = render(count, stream)
        img_path = out_dir / f"{name}-images-idx3-ubyte"
        lbl_path = out_dir / f"{name}-labels-idx1-ubyte"
        write_idx(img_path, IdxTensor(IMAGE_MAGIC, (count, 28, 28), imgs))
        write_idx(lbl_path, IdxTensor(LABEL_MAGIC, (count,), labels))
        paths[f"{name}_images"] = img_path
        paths[f"{name}_labels"] = lbl_path
    return paths
