import numpy as np
import pytest

from hmgroup import HierRateModel, default_modcod_table
from hmgroup.matching_core import CostMatrix

# Symmetric 3x3 matrix whose two optimal assignments are both 3-cycles, i.e.
# no optimal assignment is self-inverse: the unconstrained optimum costs 8
# while the best grouping costs 9.
COUNTEREXAMPLE_3X3 = np.array(
    [
        [3.0, 4.0, 1.0],
        [4.0, 7.0, 3.0],
        [1.0, 3.0, 2.0],
    ]
)


@pytest.fixture(scope="session")
def counterexample() -> CostMatrix:
    return CostMatrix(COUNTEREXAMPLE_3X3)


@pytest.fixture(scope="session")
def table():
    return default_modcod_table()


@pytest.fixture(scope="session")
def capacity_model() -> HierRateModel:
    return HierRateModel()


def random_symmetric_cost(rng: np.random.Generator, n: int, quantized: bool = False) -> CostMatrix:
    """Random positive symmetric matrix; quantized variants have many ties."""
    if quantized:
        m = rng.integers(1, 6, size=(n, n)).astype(float)
    else:
        m = rng.uniform(0.1, 2.0, size=(n, n))
    m = np.triu(m) + np.triu(m, 1).T
    return CostMatrix(m)
