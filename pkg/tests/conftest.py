"""
Pytest configuration and fixtures for testing.
"""

from typing import List

import numpy as np
import pytest

from mcm_dynamics.schemas.data import Dataset
from mcm_dynamics.schemas.dynamics import DynamicsConfig, Integrator
from mcm_dynamics.schemas.lp import StandardFormLP
from mcm_dynamics.services.data import make_synthetic, scale_dataset


def random_lp(seed: int, n_vars: int, m_cons: int) -> StandardFormLP:
    """Feasible (x = 0) and bounded (G > 0, x >= 0) maximization LP."""
    rng = np.random.default_rng(seed)
    return StandardFormLP(
        objective=rng.uniform(0.1, 1.0, size=n_vars),
        constraint_matrix=rng.uniform(0.1, 1.0, size=(m_cons, n_vars)),
        rhs=rng.uniform(1.0, 2.0, size=m_cons),
    )


def random_lp_corpus(count: int, seed: int = 0) -> List[StandardFormLP]:
    rng = np.random.default_rng(seed)
    corpus = []
    for i in range(count):
        n_vars = int(rng.integers(2, 11))
        m_cons = int(rng.integers(2, 21))
        corpus.append(random_lp(1000 * seed + i, n_vars, m_cons))
    return corpus


@pytest.fixture
def one_var_lp():
    """max x s.t. x <= 1, x >= 0."""
    return StandardFormLP(objective=[1.0], constraint_matrix=[[1.0]], rhs=[1.0])


@pytest.fixture
def identity_lp():
    """max x1 + x2 s.t. x1 <= 1, x2 <= 1."""
    return StandardFormLP(objective=[1.0, 1.0], constraint_matrix=np.eye(2), rhs=[1.0, 1.0])


@pytest.fixture
def small_random_lp():
    return random_lp(7, n_vars=3, m_cons=4)


@pytest.fixture
def lp_corpus():
    return random_lp_corpus(50)


@pytest.fixture
def two_point_dataset():
    return Dataset(features=[[1.0, 0.0], [-1.0, 0.0]], labels=[1, -1], name="two-point")


@pytest.fixture
def six_point_dataset():
    """Linearly separable along x1."""
    return Dataset(
        features=[
            [1.0, 0.5],
            [1.5, -0.5],
            [2.0, 0.0],
            [-1.0, 0.3],
            [-1.5, -0.4],
            [-2.0, 0.1],
        ],
        labels=[1, 1, 1, -1, -1, -1],
        name="six-point",
    )


@pytest.fixture
def xor_dataset():
    """Six XOR-style points: label is the sign of x1 * x2."""
    return Dataset(
        features=[
            [1.0, 1.0],
            [-1.0, -1.0],
            [2.0, 2.0],
            [1.0, -1.0],
            [-1.0, 1.0],
            [-2.0, 2.0],
        ],
        labels=[1, 1, 1, -1, -1, -1],
        name="xor",
    )


@pytest.fixture
def separable_dataset():
    return scale_dataset(make_synthetic("separable-blobs", 20, seed=3), "minmax")


@pytest.fixture
def overlap_dataset():
    return scale_dataset(make_synthetic("gaussian-overlap", 40, seed=5), "minmax")


@pytest.fixture
def fast_config():
    """Adaptive integration settings that converge quickly on small instances."""
    return DynamicsConfig(
        k=5.0,
        integrator=Integrator.RK45_ADAPTIVE,
        step_size=0.1,
        max_time=1e5,
        convergence_tol=1e-6,
        trace_stride=1,
    )


@pytest.fixture
def euler_config():
    return DynamicsConfig(
        k=1.0,
        integrator=Integrator.EXPLICIT_EULER,
        step_size=0.1,
        max_time=1.0,
        trace_stride=1,
    )
