import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gentune.rng import derive_rng


@pytest.fixture
def rng():
    return derive_rng(20250800)


def make_ar1_dataset(seed, n, p, rho=0.5, noise_sd=1.0, theta=None):
    from gentune.ridge import Dataset

    gen = derive_rng(seed)
    cov = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    L = np.linalg.cholesky(cov)
    X = gen.standard_normal((n, p)) @ L.T
    if theta is None:
        theta = gen.standard_normal(p)
    y = X @ np.asarray(theta) + noise_sd * gen.standard_normal(n)
    return Dataset(X, y)
