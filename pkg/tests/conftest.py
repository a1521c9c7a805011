"""Shared fixtures: reference surfaces and cached metric builds."""

import numpy as np
import pytest

from surface_calc.geometry import (
    GarabedianStellarator,
    SurfaceOfRevolution,
    TorusOfRevolution,
    TrigSeries,
    build_metric,
    evaluate_surface,
    flat_metric,
)
from surface_calc.spectral import Grid

# Stellarator instance used throughout: axis r0 = 4.8 + 0.1 cos v,
# z0 = 0.1 sin v, s = 0.8, stretch a1 = 0.01, and the boundary mode table.
STELLARATOR_DELTAS = {
    (-1, -1): 0.17,
    (-1, 0): 0.11,
    (0, 0): 1.0,
    (0, 1): 0.07,
    (1, 0): 4.5,
    (2, 0): -0.25,
    (2, 1): -0.45,
}


def make_stellarator(s: float = 0.8) -> GarabedianStellarator:
    return GarabedianStellarator.from_tables(
        r0_terms=[(0, 4.8, 0.0), (1, 0.1, 0.0)],
        z0_terms=[(1, 0.0, 0.1)],
        deltas=STELLARATOR_DELTAS,
        s=s,
        stretch_a1=0.01,
    )


@pytest.fixture(scope="session")
def stellarator():
    return make_stellarator()


@pytest.fixture(scope="session")
def torus():
    return TorusOfRevolution(major_radius=3.0, minor_radius=1.0)


@pytest.fixture(scope="session")
def revolution():
    # non-circular profile, still well inside r > 0
    return SurfaceOfRevolution(
        r_profile=TrigSeries.from_terms([(0, 3.0, 0.0), (1, 0.6, 0.0), (2, 0.0, 0.2)]),
        z_profile=TrigSeries.from_terms([(1, 0.0, 0.9), (2, 0.1, 0.0)]),
    )


def _metric(spec, n):
    return build_metric(evaluate_surface(spec, Grid(n)))


@pytest.fixture(scope="session")
def torus_metric_95(torus):
    return _metric(torus, 95)

@pytest.fixture(scope="session")
def torus_metric_47(torus):
    return _metric(torus, 47)


@pytest.fixture(scope="session")
def stell_metric_47(stellarator):
    return _metric(stellarator, 47)


@pytest.fixture(scope="session")
def stell_metric_95(stellarator):
    return _metric(stellarator, 95)


@pytest.fixture(scope="session")
def revolution_metric_95(revolution):
    return _metric(revolution, 95)


@pytest.fixture(scope="session")
def flat_metric_23():
    return flat_metric(Grid(23))


def random_scalar(grid, seed=0):
    return np.random.default_rng(seed).standard_normal((grid.n, grid.n))
