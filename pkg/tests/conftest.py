import numpy as np
import pytest

from photonic_puf.encoding import GridConfig
from photonic_puf.kernel import generate_dataset
from photonic_puf.model import build_puf


@pytest.fixture(scope="session")
def small_grid():
    # 300 x 8 = 2400 challenges, covers the whole dphi range sparsely
    return GridConfig(ex2_step=0.003, ex2_count=300, dphi_step=0.7, dphi_count=8)


@pytest.fixture(scope="session")
def small_dataset(small_grid):
    return generate_dataset(build_puf(42), small_grid)


@pytest.fixture(scope="session")
def small_dataset_pair(small_grid, small_dataset):
    return small_dataset, generate_dataset(build_puf(43), small_grid)
