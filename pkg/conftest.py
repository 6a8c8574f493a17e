# conftest.py
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from app.models.potential import LocallyConstantPotential
from app.models.transport import CostPair
from app.thermo.transfer import normalize_potential
from app.transport.dual import solve_dual
from app.transport.kernel import build_plan_kernel

CONFIGS = Path(__file__).parent / "configs"

# Пример с C1=[[3,5],[2,4]], C2=[[2,1],[4,3]]: μ = (0.7, 0.3)
EXAMPLE_P = 0.7
EXAMPLE_Z = (0.101972, 0.0568922)
EXAMPLE_B = [[0.4197, 0.566751], [0.431512, 0.578563]]
EXAMPLE_H = (0.596709, 0.802458)
EXAMPLE_CBAR1 = [[0.3059, 0.379132], [0.274264, 0.407887]]
EXAMPLE_CBAR2 = [[0.113784, 0.0423052], [0.306036, 0.170677]]
EXAMPLE_OBJECTIVE = 2.45812


@pytest.fixture
def example_costs() -> CostPair:
    return CostPair([[3, 5], [2, 4]], [[2, 1], [4, 3]], EXAMPLE_P)


@pytest.fixture
def example_kernel(example_costs):
    return build_plan_kernel(example_costs, solve_dual(example_costs))


@pytest.fixture
def classical_potential() -> LocallyConstantPotential:
    """e^A = [[1, 2], [3, 4]]."""
    return LocallyConstantPotential.from_exp_matrix([[1, 2], [3, 4]])


@pytest.fixture
def classical_normalized(classical_potential) -> LocallyConstantPotential:
    return normalize_potential(classical_potential)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def random_column_stochastic(rng: np.random.Generator) -> np.ndarray:
    m = rng.uniform(0.05, 1.0, size=(2, 2))
    return m / m.sum(axis=0, keepdims=True)


def random_costs(rng: np.random.Generator) -> CostPair:
    return CostPair(rng.uniform(0.2, 5.0, (2, 2)), rng.uniform(0.2, 5.0, (2, 2)), float(rng.uniform(0.05, 0.95)))
