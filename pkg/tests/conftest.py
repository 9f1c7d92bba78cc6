import numpy as np
import pytest

from fowler6 import (
    derive_constants,
    equilibrium_amplitude,
    seam_search,
    solve_periodic,
    sweep,
)


@pytest.fixture(scope="session")
def p7():
    return derive_constants(7, 3)


@pytest.fixture(scope="session")
def sol05(p7):
    params, spec = p7
    return solve_periodic(params, spec, 0.5, method="continuation")


@pytest.fixture(scope="session")
def sweep8(p7):
    params, spec = p7
    grid = [round(0.1 * k, 1) for k in range(1, 9)]
    sols = sweep(params, spec, grid)
    assert all(s is not None for s in sols)
    return sols


@pytest.fixture(scope="session")
def seam_pair(p7):
    """Two independently seeded boundary searches at a0 = 0.5, both solved."""
    params, spec = p7
    out = []
    for offset in (0.0, 0.37):
        bracket = seam_search(params, spec, 0.5, grid_offset=offset)
        sol = solve_periodic(params, spec, 0.5, method="seam", seam_bracket=bracket)
        out.append((bracket, sol))
    return out


@pytest.fixture(scope="session")
def sol_near_eq(p7):
    params, spec = p7
    a_star = equilibrium_amplitude(params, spec)
    return solve_periodic(params, spec, a_star - 1e-4, method="continuation")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
