import functools

import numpy as np
import pytest

from eigencrit.discretization import assemble_dirichlet_laplacian, build_grid
from eigencrit.eigensolver import normalize_mode, solve_lowest
from eigencrit.fields import ScalarField
from eigencrit.geometry import DomainSpec, make_family


@functools.lru_cache(maxsize=None)
def solved(family: str, N: float, h: float, m: int):
    """Domain, grid and the ``m`` lowest modes, shared across tests."""
    dom = make_family(DomainSpec(family=family, N=N))
    grid = build_grid(dom, h)
    modes = solve_lowest(assemble_dirichlet_laplacian(grid), m, tol=1e-10)
    return dom, grid, modes


def mode_field(family: str, N: float, h: float, k: int, m: int | None = None) -> ScalarField:
    dom, grid, modes = solved(family, N, h, m or k)
    return ScalarField(grid, normalize_mode(modes[k - 1], dom).values)


@pytest.fixture(scope="session")
def rect4_field():
    """Normalized second mode of the N=4 rectangle at h=1/64."""
    return mode_field("rectangle", 4, 1 / 64, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
