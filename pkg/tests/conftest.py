import numpy as np
import pytest

import polyflow as pf


@pytest.fixture(scope="session")
def circle_grid():
    return pf.build_grid(pf.GridSpec(1, (256,), (2 * np.pi,), "Spectral"))


@pytest.fixture(scope="session")
def torus_grid():
    return pf.build_grid(
        pf.GridSpec(2, (64, 64), (2 * np.pi, 2 * np.pi), "Spectral")
    )


@pytest.fixture(scope="session")
def flat_circle(circle_grid):
    spec = pf.SpaceFormSpec(0.0, 2)
    return pf.builtin_map("Circle", {"r": 1.0}, circle_grid, spec)


def builtin_fixture_set():
    """(name, params, grid spec tuple, target) for every built-in default."""
    two_pi = 2 * np.pi
    return [
        ("Circle", {"r": 1.0}, (1, (256,), (two_pi,)), pf.SpaceFormSpec(0.0, 2)),
        (
            "PerturbedGeodesicH2",
            {"amplitude": 0.05, "k": 3},
            (1, (256,), (two_pi,)),
            pf.SpaceFormSpec(-1.0, 2),
        ),
        ("GreatCircleS2", {}, (1, (256,), (two_pi,)), pf.SpaceFormSpec(1.0, 2)),
        (
            "TorusCliffordLike",
            {},
            (2, (64, 64), (two_pi, two_pi)),
            pf.SpaceFormSpec(1.0, 3),
        ),
        (
            "TorusCliffordLike",
            {},
            (2, (64, 64), (two_pi, two_pi)),
            pf.SpaceFormSpec(0.0, 4),
        ),
        (
            "TorusCliffordLike",
            {},
            (2, (64, 64), (two_pi, two_pi)),
            pf.SpaceFormSpec(-1.0, 3),
        ),
        (
            "GraphSurface",
            {},
            (2, (64, 64), (two_pi, two_pi)),
            pf.SpaceFormSpec(0.0, 5),
        ),
    ]


def build_fixture(name, params, grid_args, target, differentiation="Spectral"):
    dims, sizes, lengths = grid_args
    grid = pf.build_grid(pf.GridSpec(dims, sizes, lengths, differentiation))
    return pf.builtin_map(name, params, grid, target)


def frame_for(phi, induced=True):
    if induced:
        metric = pf.induced_metric(phi)
    else:
        metric = pf.identity_metric(phi.grid)
    return pf.orthonormal_frame(phi.grid, metric)
