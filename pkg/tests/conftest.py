import time

import numpy as np
import pytest

from sdbf import MultinomialBayesFactor, MvtBayesFactor
from sdbf.datasets import cd45_count_differences, mendel_pea_counts


@pytest.fixture(scope="session")
def cd45_data():
    return cd45_count_differences()


@pytest.fixture(scope="session")
def multinomial_golden():
    """Full-scale multinomial run (1e7 draws per ingredient) with wall time."""
    start = time.perf_counter()
    estimator = MultinomialBayesFactor(n_mc=10_000_000, seed=20250810)
    estimator.fit(mendel_pea_counts())
    elapsed = time.perf_counter() - start
    return estimator, elapsed


@pytest.fixture(scope="session")
def mvt_golden(cd45_data):
    """Full-scale multivariate t run (1e5 retained draws per chain).

    Uses the Cauchy approximation of the conditional prior, which is the
    mode the reference numbers were produced with.
    """
    start = time.perf_counter()
    estimator = MvtBayesFactor(n_draws=100_000, conditional_prior="cauchy", seed=20250810)
    estimator.fit(cd45_data)
    elapsed = time.perf_counter() - start
    return estimator, elapsed


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
