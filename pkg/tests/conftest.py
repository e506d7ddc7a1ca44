"""Shared fixtures: the reference parameter set nu=1, b=2, a=0.25 (k = 1) and grids."""

from pathlib import Path

import pytest

from wavelab.core.grid_ops import Grid
from wavelab.core.wave_core import derive_constants
from wavelab.utils.schemas import ModelParams


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def params() -> ModelParams:
    return derive_constants(1.0, 2.0, 0.25, 2.0)


@pytest.fixture(scope="session")
def grid(params: ModelParams) -> Grid:
    """Reference grid L = 40, n = 4001."""
    return Grid.for_params(params, 40.0, 4001)


@pytest.fixture(scope="session")
def coarse_grid(params: ModelParams) -> Grid:
    """Cheap grid for time stepping: L = 40, n = 801."""
    return Grid.for_params(params, 40.0, 801)


@pytest.fixture(scope="session")
def config_dir() -> Path:
    return CONFIG_DIR
