"""Declarative experiment configuration.

One INI-style file per experiment, sections of key = value pairs. Every key
an experiment understands must be present, and unknown sections or keys are
hard errors so typos cannot silently change a run.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError

_BOOL = {"on": True, "true": True, "1": True, "yes": True,
         "off": False, "false": False, "0": False, "no": False}


def _parse_bool(s: str) -> bool:
    try:
        return _BOOL[s.strip().lower()]
    except KeyError:
        raise ConfigError(f"expected on/off, got {s!r}") from None


def _parse_float_list(s: str):
    return tuple(float(x) for x in s.split(",") if x.strip())


def _parse_int_list(s: str):
    return tuple(int(x) for x in s.split(",") if x.strip())


_PARSERS = {
    "int": int,
    "float": float,
    "str": lambda s: s.strip(),
    "bool": _parse_bool,
    "floats": _parse_float_list,
    "ints": _parse_int_list,
}

# experiment name -> {section: {key: type}}
SCHEMAS = {
    "toy_gms": {
        "experiment": {"name": "str", "seed": "int", "replications": "int",
                       "output": "str"},
        "simulation": {"n": "int", "p": "int", "ar1_rho": "float",
                       "theta_star": "floats", "noise_sd": "float"},
        "weights": {"law": "str"},
        "proposal": {"lambda_law": "str", "lambda_lo": "float",
                     "lambda_hi": "float"},
        "training": {"budgets": "ints", "total_steps": "int",
                     "batch_size": "int", "learning_rate": "float",
                     "momentum": "float", "schedule": "str",
                     "time_match_factor": "float",
                     "time_match_solve_equiv": "float"},
        "evaluation": {"ipl_draws": "int"},
        "acceptance": {"checks": "bool"},
    },
    "ridge_demo": {
        "experiment": {"name": "str", "seed": "int", "output": "str"},
        "simulation": {"n_train": "int", "p": "int", "ar1_rho": "float",
                       "noise_sd": "float", "n_test": "int",
                       "theta_scale": "float", "theta_decay": "float"},
        "grid": {"lo": "float", "hi": "float", "points": "int"},
        "cv": {"folds": "int"},
        "amortized": {"steps": "int", "batch_size": "int",
                      "learning_rate": "float", "momentum": "float"},
        "acceptance": {"checks": "bool"},
    },
    "quantile_demo": {
        "experiment": {"name": "str", "seed": "int", "replications": "int",
                       "output": "str"},
        "simulation": {"n": "int", "x_lo": "float", "x_hi": "float",
                       "intercept": "float", "slope": "float",
                       "scale_base": "float", "scale_slope": "float"},
        "sweep": {"q_values": "floats", "lambda_values": "floats"},
        "weights": {"law": "str"},
        "irls": {"eps_residual": "float", "max_iters": "int", "tol": "float"},
        "acceptance": {"checks": "bool"},
    },
    "mnist_demo": {
        "experiment": {"name": "str", "seed": "int", "output": "str"},
        "data": {"source": "str", "dir": "str", "n_train": "int",
                 "n_val": "int", "n_test": "int", "verify_sha256": "bool",
                 "sha256_train_images": "str", "sha256_train_labels": "str",
                 "sha256_test_images": "str", "sha256_test_labels": "str"},
        "model": {"hidden": "int"},
        "hypernet": {"lambda_lo": "float", "lambda_hi": "float",
                     "steps": "int", "batch_size": "int",
                     "learning_rate": "float", "momentum": "float"},
        "baseline": {"steps": "int", "learning_rate": "float",
                     "momentum": "float", "batch_size": "int"},
        "grid": {"points": "int"},
        "weights": {"law": "str"},
        "acceptance": {"checks": "bool"},
    },
}

EXPERIMENT_NAMES = tuple(SCHEMAS)


def load_config(path, experiment: str) -> dict:
    """Parse and validate one experiment config into nested dicts."""
    schema = SCHEMAS.get(experiment)
    if schema is None:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"expected one of {list(SCHEMAS)}")
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    cfg: dict = {}
    for section in parser.sections():
        if section not in schema:
            raise ConfigError(f"{path}: unknown section [{section}]")
        cfg[section] = {}
        for key, raw in parser.items(section):
            if key not in schema[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            parse = _PARSERS[schema[section][key]]
            try:
                cfg[section][key] = parse(raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(
                    f"{path}: [{section}] {key} = {raw!r}: {exc}") from None
    for section, keys in schema.items():
        if section not in cfg:
            raise ConfigError(f"{path}: missing section [{section}]")
        missing = [k for k in keys if k not in cfg[section]]
        if missing:
            raise ConfigError(f"{path}: [{section}] missing keys {missing}")
    declared = cfg["experiment"].get("name")
    if declared != experiment:
        raise ConfigError(
            f"{path}: [experiment] name = {declared!r}, expected {experiment!r}")
    return cfg
