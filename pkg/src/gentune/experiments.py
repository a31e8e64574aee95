"""Experiment drivers behind the CLI.

Each driver consumes a validated config, runs the experiment at desk scale,
writes schema CSVs, and evaluates its built-in result checks (skippable via
the config's [acceptance] section for reduced smoke configs). Thresholds in
the checks are fixed here, not configurable.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ridge as ridge_mod
from .csvio import SCHEMA_VERSION, write_csv
from .cv import cv_select, kfold_split, test_mse
from .errors import ConfigError, DataError
from .generator import (CountingSolver, HyperProposal, InputSpec, LogUniform,
                        OptConfig, default_input_spec, init_model, ipl,
                        train_criterion, train_supervised)
from .idx import file_sha256
from .mnist import (MlpSpec, evaluate_classifier, hypernet_forward,
                    init_hypernet, load_split, save_hypernet,
                    synthesize_digit_files, train_baseline,
                    train_hypernet_criterion, tuning_curve)
from .quantile import QuantileConfig, irls_quantile
from .ridge import (Dataset, WeightedRidgeObjective, gcv_select,
                    solve_weighted_ridge)
from .rng import derive_rng, derive_seed
from .weights import WeightKind, WeightLaw, ones_draw, sample

MNIST_FILE_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "t10k_images": "t10k-images-idx3-ubyte",
    "t10k_labels": "t10k-labels-idx1-ubyte",
}

MNIST_DOWNLOAD_HINT = (
    "place the four canonical IDX files (train-images-idx3-ubyte, "
    "train-labels-idx1-ubyte, t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte) "
    "in the configured data directory; this tool performs no downloads")


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentResult:
    name: str
    csv_paths: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _check(checks: list, name: str, passed, detail: str) -> None:
    checks.append(CheckOutcome(name=name, passed=bool(passed), detail=detail))


def simulate_ar1(seed: int, n: int, p: int, rho: float, theta: np.ndarray,
                 noise_sd: float) -> Dataset:
    """Gaussian design with AR(1) column correlation and Gaussian noise."""
    rng = derive_rng(seed)
    cov = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    L = np.linalg.cholesky(cov)
    X = rng.standard_normal((n, p)) @ L.T
    y = X @ theta + noise_sd * rng.standard_normal(n)
    return Dataset(X, y)


def _weight_law(name: str, n: int) -> WeightLaw:
    try:
        return WeightLaw(WeightKind(name), n)
    except ValueError:
        raise ConfigError(
            f"unknown weight law {name!r}; expected one of "
            f"{[k.value for k in WeightKind]}") from None


def _apply_overrides(cfg: dict, seed=None, reps=None, out=None) -> dict:
    cfg = {s: dict(kv) for s, kv in cfg.items()}
    if seed is not None:
        cfg["experiment"]["seed"] = int(seed)
    if reps is not None and "replications" in cfg["experiment"]:
        cfg["experiment"]["replications"] = int(reps)
    if out is not None:
        cfg["experiment"]["output"] = str(out)
    return cfg


# ---------------------------------------------------------------------------
# Toy generator-training comparison


def run_toy_gms(cfg: dict, seed=None, reps=None, out=None,
                threads: int = 1) -> ExperimentResult:
    """Supervised vs criterion generator training on the weighted-ridge toy.

    For every budget B the supervised mode pays B optimizer labels; the
    criterion mode runs the identical number of SGD steps with zero labels.
    Extra rows report a time-matched criterion budget derived from the
    config's fixed per-step cost ratios.
    """
    cfg = _apply_overrides(cfg, seed, reps, out)
    exp = cfg["experiment"]
    sim = cfg["simulation"]
    tr = cfg["training"]
    master = exp["seed"]
    out_dir = Path(exp["output"])

    theta_star = np.asarray(sim["theta_star"])
    if theta_star.size != sim["p"]:
        raise ConfigError("theta_star length must equal p")
    data = simulate_ar1(derive_seed(master, 0), sim["n"], sim["p"],
                        sim["ar1_rho"], theta_star, sim["noise_sd"])
    proposal = HyperProposal(LogUniform(cfg["proposal"]["lambda_lo"],
                                        cfg["proposal"]["lambda_hi"]))
    if cfg["proposal"]["lambda_law"] != "loguniform":
        raise ConfigError("toy proposal supports lambda_law = loguniform")
    law = _weight_law(cfg["weights"]["law"], data.n)
    objective = WeightedRidgeObjective(data)
    input_spec = default_input_spec(data.n, proposal)
    batch = tr["batch_size"]
    total_steps = tr["total_steps"]
    budgets = tr["budgets"]
    eval_draws = cfg["evaluation"]["ipl_draws"]

    def oracle(w, h):
        return solve_weighted_ridge(data, w, h.lam).theta

    def run_replication(r: int):
        rows = []
        for B in budgets:
            opt = OptConfig(learning_rate=tr["learning_rate"],
                            momentum=tr["momentum"], batch_size=batch,
                            epochs=max(1, round(total_steps * batch / B)),
                            schedule=tr["schedule"])
            eval_seed = derive_seed(master, 2, r, B)

            sup = init_model("linear-features", input_spec, data.p)
            counting = CountingSolver(oracle)
            rep = train_supervised(sup, proposal, law, counting, B, opt,
                                   seed=derive_seed(master, 1, r, B))
            t0 = time.perf_counter()
            mean, se = ipl(sup, proposal, law, oracle, eval_draws, eval_seed)
            rows.append({
                "replication": r, "method": "supervised", "budget_mode": "steps",
                "budget": B, "train_steps": rep.steps,
                "label_solves": counting.calls, "ipl": mean,
                "ipl_mc_std_err": se, "label_time_s": rep.label_time_s,
                "train_time_s": rep.train_time_s,
                "eval_time_s": time.perf_counter() - t0,
                "seed": derive_seed(master, 1, r, B),
            })

            for mode, steps in (
                ("steps", rep.steps),
                ("time", max(1, round(total_steps * tr["time_match_factor"]
                                      + tr["time_match_solve_equiv"] * B))),
            ):
                crit = init_model("linear-features", input_spec, data.p)
                solves_before = ridge_mod.solve_count()
                crep = train_criterion(crit, proposal, law, objective, steps,
                                       opt, seed=derive_seed(master, 3, r, B))
                label_solves = ridge_mod.solve_count() - solves_before
                t0 = time.perf_counter()
                mean, se = ipl(crit, proposal, law, oracle, eval_draws, eval_seed)
                rows.append({
                    "replication": r, "method": "criterion", "budget_mode": mode,
                    "budget": B, "train_steps": crep.steps,
                    "label_solves": label_solves, "ipl": mean,
                    "ipl_mc_std_err": se, "label_time_s": 0.0,
                    "train_time_s": crep.train_time_s,
                    "eval_time_s": time.perf_counter() - t0,
                    "seed": derive_seed(master, 3, r, B),
                })
        return rows

    R = exp["replications"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_rep = list(pool.map(run_replication, range(R)))
    else:
        per_rep = [run_replication(r) for r in range(R)]
    rows = [dict(row, schema_version=SCHEMA_VERSION, experiment="toy_gms")
            for rep_rows in per_rep for row in rep_rows]
    rows.sort(key=lambda d: (d["replication"], d["budget"], d["method"],
                             d["budget_mode"]))
    path = write_csv(out_dir / "toy_gms_ipl.csv", "toy_gms_ipl", rows)

    summary_rows = []
    for method in ("supervised", "criterion"):
        for B in budgets:
            vals = np.array([d["ipl"] for d in rows
                             if d["method"] == method and d["budget"] == B
                             and d["budget_mode"] == "steps"])
            summary_rows.append({
                "schema_version": SCHEMA_VERSION, "experiment": "toy_gms",
                "method": method, "budget": B, "replications": vals.size,
                "ipl_mean": float(vals.mean()),
                "ipl_std_err": float(vals.std(ddof=1) / np.sqrt(vals.size))
                if vals.size > 1 else 0.0,
                "seed": master,
            })
    summary_path = write_csv(out_dir / "toy_gms_ipl_summary.csv",
                             "toy_gms_ipl_summary", summary_rows)
    result = ExperimentResult(name="toy_gms",
                              csv_paths={"toy_gms_ipl": path,
                                         "toy_gms_ipl_summary": summary_path})

    if cfg["acceptance"]["checks"]:
        step_rows = [d for d in rows if d["budget_mode"] == "steps"]
        sup = {B: np.mean([d["ipl"] for d in step_rows
                           if d["method"] == "supervised" and d["budget"] == B])
               for B in budgets}
        crit = {B: np.mean([d["ipl"] for d in step_rows
                            if d["method"] == "criterion" and d["budget"] == B])
                for B in budgets}
        crit_vals = np.array(list(crit.values()))
        flat = float(crit_vals.max() / crit_vals.min() - 1.0)
        zero_labels = all(d["label_solves"] == 0 for d in rows
                          if d["method"] == "criterion")
        _check(result.checks, "supervised_ipl_gap",
               sup[budgets[0]] > 1.5 * sup[budgets[-1]],
               f"IPL(B={budgets[0]})={sup[budgets[0]]:.5f} vs "
               f"1.5*IPL(B={budgets[-1]})={1.5 * sup[budgets[-1]]:.5f}")
        _check(result.checks, "criterion_flat",
               flat < 0.20, f"criterion IPL spread {flat:.1%} across budgets")
        _check(result.checks, "criterion_zero_labels", zero_labels,
               "criterion rows report zero optimizer labels")
    return result


# ---------------------------------------------------------------------------
# Ridge tuning comparison


def _theta_decaying(p: int, scale: float, decay: float) -> np.ndarray:
    j = np.arange(p)
    return scale * ((-1.0) ** j) * np.exp(-j / decay)


def _fold_curve(model, train: Dataset, val_idx: np.ndarray,
                grid: np.ndarray) -> np.ndarray:
    """Validation MSE of one fold's map at every grid point (one pass)."""
    W = np.ones((len(grid), model.input_spec.n_obs))
    X_in = model.input_spec.encode_batch(W, np.asarray(grid),
                                         np.empty((len(grid), 0)))
    F = np.hstack([np.ones((len(grid), 1)), X_in[:, :1] ** 2, X_in])
    Theta = F @ model.phi.reshape(F.shape[1], train.p)
    R = train.y[val_idx][None, :] - Theta @ train.X[val_idx].T
    return (R * R).mean(axis=1)


def amortized_fold_curve(models, train: Dataset, folds, grid) -> np.ndarray:
    """Mean validation MSE over folds of the per-fold maps, on the grid."""
    curve = np.zeros(len(grid))
    for k, model in enumerate(models):
        curve += _fold_curve(model, train, folds.val_indices(k), grid)
    return curve / folds.K


def run_ridge_demo(cfg: dict, seed=None, reps=None, out=None,
                   threads: int = 1) -> ExperimentResult:
    """GCV vs K-fold CV vs an amortized per-fold proxy on simulated data.

    The proxy maps the penalty through [1, log lam, (log lam)^2] per fold,
    trained label-free on that fold's training rows only; evaluating its
    curve replaces the K x grid refit loop.
    """
    cfg = _apply_overrides(cfg, seed, reps, out)
    exp, sim = cfg["experiment"], cfg["simulation"]
    master = exp["seed"]
    out_dir = Path(exp["output"])
    theta_star = _theta_decaying(sim["p"], sim["theta_scale"],
                                 sim["theta_decay"])
    train = simulate_ar1(derive_seed(master, 0), sim["n_train"], sim["p"],
                         sim["ar1_rho"], theta_star, sim["noise_sd"])
    test = simulate_ar1(derive_seed(master, 1), sim["n_test"], sim["p"],
                        sim["ar1_rho"], theta_star, sim["noise_sd"])
    grid = np.logspace(np.log10(cfg["grid"]["lo"]), np.log10(cfg["grid"]["hi"]),
                       cfg["grid"]["points"])

    curves_rows, summary_rows = [], []

    def add_curve(method, values, std_errs, selected_lam):
        for lam, v, se in zip(grid, values, std_errs):
            curves_rows.append({
                "schema_version": SCHEMA_VERSION, "experiment": "ridge_demo",
                "method": method, "lambda": float(lam), "value": float(v),
                "std_err": float(se),
                "selected": 1 if lam == selected_lam else 0,
            })

    def add_summary(method, lam_hat, mse, eval_time, train_time):
        summary_rows.append({
            "schema_version": SCHEMA_VERSION, "experiment": "ridge_demo",
            "method": method, "selected_lambda": float(lam_hat),
            "test_mse": float(mse), "eval_time_s": eval_time,
            "train_time_s": train_time, "seed": master,
        })

    ones = ones_draw(train.n)

    t0 = time.perf_counter()
    g = gcv_select(train, grid)
    t_gcv = time.perf_counter() - t0
    mse_gcv = test_mse(solve_weighted_ridge(train, ones, g.lam_hat).theta, test)
    add_curve("gcv", g.values, np.zeros_like(g.values), g.lam_hat)
    add_summary("gcv", g.lam_hat, mse_gcv, t_gcv, 0.0)

    folds = kfold_split(train.n, cfg["cv"]["folds"], derive_seed(master, 2))
    t0 = time.perf_counter()
    c = cv_select(train, grid, folds)
    t_cv = time.perf_counter() - t0
    mse_cv = test_mse(solve_weighted_ridge(train, ones, c.lam_hat).theta, test)
    # per-fold curve matrix for error bars (not part of the timed loop)
    fold_scores = np.empty((folds.K, grid.size))
    for k in range(folds.K):
        w_k = folds.train_weights(k)
        idx = folds.val_indices(k)
        for j, lam in enumerate(grid):
            th = solve_weighted_ridge(train, w_k, float(lam)).theta
            r = train.y[idx] - train.X[idx] @ th
            fold_scores[k, j] = float(r @ r) / idx.size
    add_curve("cv", fold_scores.mean(axis=0),
              fold_scores.std(axis=0, ddof=1) / np.sqrt(folds.K), c.lam_hat)
    add_summary("cv", c.lam_hat, mse_cv, t_cv, 0.0)

    am = cfg["amortized"]
    proposal = HyperProposal(LogUniform(float(grid[0]), float(grid[-1])))
    t0 = time.perf_counter()
    models = []
    for k in range(folds.K):
        view = train.rows(np.nonzero(folds.fold_of != k)[0])
        spec = InputSpec(n_obs=view.n, omega_encoding="none",
                         log_lambda_bounds=(float(grid[0]), float(grid[-1])))
        model = init_model("linear-features", spec, train.p)
        train_criterion(
            model, proposal, WeightLaw(WeightKind.ONES, view.n),
            WeightedRidgeObjective(view, n_norm=train.n), am["steps"],
            OptConfig(learning_rate=am["learning_rate"],
                      momentum=am["momentum"], batch_size=am["batch_size"]),
            seed=derive_seed(master, 3, k))
        models.append(model)
    t_am_train = time.perf_counter() - t0

    t0 = time.perf_counter()
    am_curve = amortized_fold_curve(models, train, folds, grid)
    t_am_eval = time.perf_counter() - t0
    lam_am = float(grid[int(np.argmin(am_curve))])
    mse_am = test_mse(solve_weighted_ridge(train, ones, lam_am).theta, test)
    fold_curves = np.stack([
        _fold_curve(m, train, folds.val_indices(k), grid)
        for k, m in enumerate(models)
    ])
    add_curve("amortized", am_curve,
              fold_curves.std(axis=0, ddof=1) / np.sqrt(folds.K), lam_am)
    add_summary("amortized", lam_am, mse_am, t_am_eval, t_am_train)

    paths = {
        "ridge_curves": write_csv(out_dir / "ridge_curves.csv", "ridge_curves",
                                  curves_rows),
        "ridge_summary": write_csv(out_dir / "ridge_summary.csv",
                                   "ridge_summary", summary_rows),
    }
    result = ExperimentResult(name="ridge_demo", csv_paths=paths)

    if cfg["acceptance"]["checks"]:
        log_step = np.log(grid[1] / grid[0])
        gap = abs(np.log(g.lam_hat / c.lam_hat)) / log_step
        _check(result.checks, "selected_in_grid",
               all(s["selected_lambda"] in grid for s in summary_rows),
               "every method selected a grid point")
        _check(result.checks, "gcv_cv_within_one_step", gap <= 1.0 + 1e-9,
               f"GCV {g.lam_hat:.4g} vs CV {c.lam_hat:.4g}: {gap:.2f} steps")
        _check(result.checks, "amortized_mse_ratio",
               mse_am <= 1.05 * mse_cv,
               f"test MSE {mse_am:.4f} vs 1.05 x CV {mse_cv:.4f}")
        _check(result.checks, "amortized_eval_speedup",
               t_cv >= 2.0 * t_am_eval,
               f"CV loop {t_cv * 1e3:.2f} ms vs amortized "
               f"{t_am_eval * 1e3:.2f} ms")
    return result


# ---------------------------------------------------------------------------
# Quantile sweep


def run_quantile_demo(cfg: dict, seed=None, reps=None, out=None,
                      threads: int = 1) -> ExperimentResult:
    """IRLS quantile fits over a (q, lambda) grid on location-scale data."""
    cfg = _apply_overrides(cfg, seed, reps, out)
    exp, sim, sweep = cfg["experiment"], cfg["simulation"], cfg["sweep"]
    master = exp["seed"]
    out_dir = Path(exp["output"])
    irls_cfg = cfg["irls"]
    law_name = cfg["weights"]["law"]

    rng = derive_rng(derive_seed(master, 0))
    x = rng.uniform(sim["x_lo"], sim["x_hi"], sim["n"])
    scale = sim["scale_base"] + sim["scale_slope"] * x
    if np.any(scale <= 0):
        raise ConfigError("noise scale must stay positive over the x range")
    y = sim["intercept"] + sim["slope"] * x + scale * rng.standard_normal(sim["n"])
    data = Dataset(np.column_stack([np.ones(sim["n"]), x]), y)
    x_mean = np.array([1.0, float(x.mean())])

    rows = []
    for r in range(exp["replications"]):
        for qi, q in enumerate(sweep["q_values"]):
            for li, lam in enumerate(sweep["lambda_values"]):
                if law_name == "ones":
                    w = ones_draw(data.n)
                else:
                    w = sample(_weight_law(law_name, data.n),
                               derive_seed(master, 1, r, qi, li))
                qc = QuantileConfig(q=float(q), lam=float(lam),
                                    eps_residual=irls_cfg["eps_residual"],
                                    max_iters=irls_cfg["max_iters"],
                                    tol=irls_cfg["tol"])
                t0 = time.perf_counter()
                res = irls_quantile(data, qc, w)
                rows.append({
                    "schema_version": SCHEMA_VERSION,
                    "experiment": "quantile_demo", "replication": r,
                    "q": float(q), "lambda": float(lam),
                    "objective": res.objective,
                    "iterations": res.iterations,
                    "converged": res.converged,
                    "pred_at_mean": float(res.theta @ x_mean),
                    "fit_time_s": time.perf_counter() - t0,
                    "seed": master,
                })
    path = write_csv(out_dir / "quantile_sweep.csv", "quantile_sweep", rows)
    result = ExperimentResult(name="quantile_demo",
                              csv_paths={"quantile_sweep": path})

    if cfg["acceptance"]["checks"]:
        expected = (exp["replications"] * len(sweep["q_values"])
                    * len(sweep["lambda_values"]))
        _check(result.checks, "row_count", len(rows) == expected,
               f"{len(rows)} rows, expected {expected}")
        viol = total = 0
        for r in range(exp["replications"]):
            for lam in sweep["lambda_values"]:
                preds = [d["pred_at_mean"] for d in rows
                         if d["replication"] == r and d["lambda"] == float(lam)]
                diffs = np.diff(preds)
                viol += int((diffs < 0).sum())
                total += diffs.size
        _check(result.checks, "quantiles_monotone", viol / total < 0.05,
               f"{viol}/{total} adjacent quantile inversions")
        _check(result.checks, "all_converged",
               all(d["converged"] for d in rows), "every IRLS run converged")
    return result


# ---------------------------------------------------------------------------
# Image-classification demo


def _resolve_mnist_paths(cfg: dict, out_dir: Path) -> dict:
    d = cfg["data"]
    data_dir = Path(d["dir"])
    if d["source"] == "synthetic":
        need = max(d["n_train"] + d["n_val"], 1)
        paths = {k: data_dir / v for k, v in MNIST_FILE_NAMES.items()}
        if not all(p.is_file() for p in paths.values()):
            synthesize_digit_files(data_dir, n_train=need,
                                   n_test=max(d["n_test"], 1))
        return paths
    if d["source"] != "idx":
        raise ConfigError("data source must be 'synthetic' or 'idx'")
    paths = {k: data_dir / v for k, v in MNIST_FILE_NAMES.items()}
    missing = [str(p) for p in paths.values() if not p.is_file()]
    if missing:
        raise DataError(f"missing data files {missing}; {MNIST_DOWNLOAD_HINT}")
    if d["verify_sha256"]:
        digests = {
            "train_images": d["sha256_train_images"],
            "train_labels": d["sha256_train_labels"],
            "t10k_images": d["sha256_test_images"],
            "t10k_labels": d["sha256_test_labels"],
        }
        for key, expected in digests.items():
            if not expected:
                raise DataError(
                    f"verify_sha256 is on but no digest configured for {key}")
            actual = file_sha256(paths[key])
            if actual != expected.lower():
                raise DataError(
                    f"{paths[key]}: sha256 {actual} does not match configured "
                    f"{expected}")
    return paths


def run_mnist_demo(cfg: dict, seed=None, reps=None, out=None,
                   threads: int = 1) -> ExperimentResult:
    """Hypernet tuning curve vs one retrained baseline at the curve argmin."""
    cfg = _apply_overrides(cfg, seed, reps, out)
    exp, d = cfg["experiment"], cfg["data"]
    master = exp["seed"]
    out_dir = Path(exp["output"])
    paths = _resolve_mnist_paths(cfg, out_dir)
    split = load_split(paths["train_images"], paths["train_labels"],
                       paths["t10k_images"], paths["t10k_labels"],
                       d["n_train"], d["n_val"], d["n_test"])
    spec = MlpSpec((784, cfg["model"]["hidden"], 10))
    hn_cfg = cfg["hypernet"]
    law = _weight_law(cfg["weights"]["law"], hn_cfg["batch_size"])

    hn = init_hypernet(spec, hn_cfg["lambda_lo"], hn_cfg["lambda_hi"],
                       seed=derive_seed(master, 0),
                       use_omega_summary=law.kind is not WeightKind.ONES)
    opt = OptConfig(learning_rate=hn_cfg["learning_rate"],
                    momentum=hn_cfg["momentum"],
                    batch_size=hn_cfg["batch_size"])
    t0 = time.perf_counter()
    train_hypernet_criterion(hn, split["X_train"], split["y_train"], law, opt,
                             hn_cfg["steps"], seed=derive_seed(master, 1))
    t_train_hn = time.perf_counter() - t0
    save_hypernet(hn, out_dir / "hypernet.model")

    grid = np.logspace(np.log10(hn_cfg["lambda_lo"]),
                       np.log10(hn_cfg["lambda_hi"]), cfg["grid"]["points"])
    t0 = time.perf_counter()
    curve = tuning_curve(hn, split["X_val"], split["y_val"], grid)
    t_curve = time.perf_counter() - t0
    curve_path = write_csv(out_dir / "mnist_curve.csv", "mnist_curve", curve)

    i_best = int(np.argmin([row["val_loss"] for row in curve]))
    lam_best = float(grid[i_best])
    theta_best = hypernet_forward(hn, lam_best)
    _, test_acc_hn = evaluate_classifier(theta_best, spec, split["X_test"],
                                         split["y_test"])

    base_cfg = cfg["baseline"]
    t0 = time.perf_counter()
    theta_base, _ = train_baseline(
        spec, lam_best, split["X_train"], split["y_train"],
        OptConfig(learning_rate=base_cfg["learning_rate"],
                  momentum=base_cfg["momentum"],
                  batch_size=base_cfg["batch_size"]),
        base_cfg["steps"], seed=derive_seed(master, 2))
    t_base = time.perf_counter() - t0
    base_val_loss, base_val_acc = evaluate_classifier(
        theta_base, spec, split["X_val"], split["y_val"])
    _, base_test_acc = evaluate_classifier(theta_base, spec, split["X_test"],
                                           split["y_test"])

    speedup = (grid.size * t_base) / t_curve
    summary_rows = [
        {"schema_version": SCHEMA_VERSION, "experiment": "mnist_demo",
         "method": "hypernet", "lambda": lam_best,
         "val_loss": curve[i_best]["val_loss"],
         "val_acc": curve[i_best]["val_acc"], "test_acc": test_acc_hn,
         "train_time_s": t_train_hn, "curve_time_s": t_curve,
         "speedup": speedup, "seed": master},
        {"schema_version": SCHEMA_VERSION, "experiment": "mnist_demo",
         "method": "baseline", "lambda": lam_best, "val_loss": base_val_loss,
         "val_acc": base_val_acc, "test_acc": base_test_acc,
         "train_time_s": t_base, "curve_time_s": 0.0, "speedup": 1.0,
         "seed": master},
    ]
    summary_path = write_csv(out_dir / "mnist_summary.csv", "mnist_summary",
                             summary_rows)
    result = ExperimentResult(name="mnist_demo",
                              csv_paths={"mnist_curve": curve_path,
                                         "mnist_summary": summary_path})

    if cfg["acceptance"]["checks"]:
        accs = [row["val_acc"] for row in curve]
        _check(result.checks, "curve_rows",
               len(curve) == cfg["grid"]["points"],
               f"{len(curve)} rows for {cfg['grid']['points']} grid points")
        _check(result.checks, "curve_spans_range",
               np.isclose(grid[0], hn_cfg["lambda_lo"])
               and np.isclose(grid[-1], hn_cfg["lambda_hi"]),
               f"grid [{grid[0]:g}, {grid[-1]:g}]")
        _check(result.checks, "argmin_accuracy",
               accs[i_best] >= 0.90, f"val acc {accs[i_best]:.4f} at argmin")
        _check(result.checks, "baseline_gap",
               base_val_acc - accs[i_best] <= 0.03,
               f"baseline {base_val_acc:.4f} vs hypernet {accs[i_best]:.4f}")
        _check(result.checks, "overregularized_drop",
               accs[-1] <= accs[i_best] - 0.02,
               f"acc {accs[-1]:.4f} at lambda={grid[-1]:g} vs "
               f"{accs[i_best]:.4f} at argmin")
        _check(result.checks, "curve_speedup", speedup > 5.0,
               f"speedup {speedup:.1f}x over {grid.size} retrainings")
    return result


# ---------------------------------------------------------------------------
# run_all


RUNNERS = {
    "toy_gms": run_toy_gms,
    "ridge_demo": run_ridge_demo,
    "quantile_demo": run_quantile_demo,
    "mnist_demo": run_mnist_demo,
}


def run_all(config_dir, out=None, seed=None, reps=None,
            threads: int = 1) -> list:
    """Run every experiment from its config file in ``config_dir``.

    Missing config files are reported together before anything runs.
    """
    from .config import load_config

    config_dir = Path(config_dir)
    expected = {name: config_dir / f"{name}.ini" for name in RUNNERS}
    missing = [str(p) for p in expected.values() if not p.is_file()]
    if missing:
        raise ConfigError(
            f"config dir {config_dir} is missing expected files: {missing}")
    results = []
    for name, path in expected.items():
        cfg = load_config(path, name)
        sub_out = None if out is None else str(Path(out) / name)
        results.append(RUNNERS[name](cfg, seed=seed, reps=reps, out=sub_out,
                                     threads=threads))
    return results
