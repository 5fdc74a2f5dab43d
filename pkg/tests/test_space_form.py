"""Target-geometry primitives: projections, exponential map, curvature."""

import numpy as np
import pytest

from polyflow import space_form as sf
from polyflow.errors import DegeneratePoint

FLAT = sf.SpaceFormSpec(0.0, 2)
SPHERE = sf.SpaceFormSpec(1.0, 2)
HYP = sf.SpaceFormSpec(-1.0, 2)
ALL = [FLAT, SPHERE, HYP]


def random_point(spec, rng):
    x = rng.standard_normal(spec.ambient_dim)
    if spec.model is sf.Model.HYPERBOLOID:
        # stay strictly timelike on the upper sheet
        x[0] = np.sqrt(1.0 + np.sum(x[1:] ** 2))
    return sf.project_point(spec, x)


def random_tangent(spec, x, rng, unit=False):
    v = sf.project_tangent(spec, x, rng.standard_normal(x.shape))
    if unit:
        v = v / max(np.sqrt(sf.inner(spec, x, v, v)), 1e-12)
    return v


def test_spec_models():
    assert FLAT.model is sf.Model.FLAT and FLAT.ambient_dim == 2
    assert SPHERE.model is sf.Model.SPHERE and SPHERE.ambient_dim == 3
    assert HYP.model is sf.Model.HYPERBOLOID and HYP.ambient_dim == 3


def test_project_point_flat_identity():
    out = sf.project_point(FLAT, np.array([3.0, 4.0]))
    np.testing.assert_array_equal(out, [3.0, 4.0])


def test_project_point_sphere():
    out = sf.project_point(SPHERE, np.array([2.0, 0.0, 0.0]))
    np.testing.assert_allclose(out, [1.0, 0.0, 0.0], atol=1e-15)


def test_project_point_hyperboloid():
    # <x,x>_L = -4, radial scale 1/2
    out = sf.project_point(HYP, np.array([2.0, 0.0, 0.0]))
    np.testing.assert_allclose(out, [1.0, 0.0, 0.0], atol=1e-15)


def test_project_point_degenerate():
    with pytest.raises(DegeneratePoint):
        sf.project_point(SPHERE, np.zeros(3))
    with pytest.raises(DegeneratePoint):
        sf.project_point(HYP, np.array([1.0, 2.0, 0.0]))  # spacelike
    with pytest.raises(DegeneratePoint):
        sf.project_point(HYP, np.array([-2.0, 0.0, 0.0]))  # lower sheet


def test_project_tangent_sphere():
    x = np.array([1.0, 0.0, 0.0])
    out = sf.project_tangent(SPHERE, x, np.array([1.0, 1.0, 0.0]))
    np.testing.assert_allclose(out, [0.0, 1.0, 0.0], atol=1e-15)


def test_project_tangent_hyperboloid():
    x = np.array([1.0, 0.0, 0.0])
    out = sf.project_tangent(HYP, x, np.array([1.0, 1.0, 0.0]))
    np.testing.assert_allclose(out, [0.0, 1.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("spec", ALL)
def test_project_tangent_idempotent(spec):
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = random_point(spec, rng)
        v = rng.standard_normal(spec.ambient_dim)
        once = sf.project_tangent(spec, x, v)
        twice = sf.project_tangent(spec, x, once)
        assert np.max(np.abs(twice - once)) <= 1e-12
        if spec.model is not sf.Model.FLAT:
            assert abs(sf.ambient_form(spec, x, once)) <= 1e-12


def test_inner_hyperboloid_tangent():
    x = np.array([1.0, 0.0, 0.0])
    u = np.array([0.0, 1.0, 0.0])
    assert sf.inner(HYP, x, u, u) == 1.0
    assert sf.inner(HYP, x, np.zeros(3), u) == 0.0


def test_inner_orthogonal_coordinates():
    x = np.array([1.0, 0.0, 0.0])
    u = np.array([0.0, 1.0, 0.0])
    v = np.array([0.0, 0.0, 1.0])
    assert sf.inner(SPHERE, x, u, v) == 0.0


def test_exp_map_zero_velocity():
    rng = np.random.default_rng(1)
    for spec in ALL:
        x = random_point(spec, rng)
        np.testing.assert_allclose(
            sf.exp_map(spec, x, np.zeros_like(x)), x, atol=1e-15
        )


def test_exp_map_flat_line():
    out = sf.exp_map(FLAT, np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    np.testing.assert_array_equal(out, [4.0, 6.0])


def test_exp_map_quarter_circle():
    x = np.array([1.0, 0.0, 0.0])
    v = np.array([0.0, np.pi / 2.0, 0.0])
    np.testing.assert_allclose(
        sf.exp_map(SPHERE, x, v), [0.0, 1.0, 0.0], atol=1e-15
    )


@pytest.mark.parametrize("spec", [SPHERE, HYP])
def test_exp_map_stays_on_model(spec):
    rng = np.random.default_rng(2)
    for scale in (0.1, 1.0, 10.0):
        x = random_point(spec, rng)
        v = random_tangent(spec, x, rng)
        v *= scale / max(np.sqrt(sf.inner(spec, x, v, v)), 1e-30)
        out = sf.exp_map(spec, x, v)
        assert sf.constraint_residual(spec, out) <= 1e-10


def test_curvature_flat_vanishes():
    rng = np.random.default_rng(3)
    args = [rng.standard_normal(2) for _ in range(3)]
    out = sf.curvature_op(FLAT, np.zeros(2), *args)
    np.testing.assert_array_equal(out, np.zeros(2))


def test_curvature_space_form_formula():
    # c = -1: R(X, Y)Z = -(h(Y,Z) X - h(X,Z) Y); here h(Y,Z)=1, h(X,Z)=0
    x = np.array([1.0, 0.0, 0.0])
    X = np.array([0.0, 1.0, 0.0])
    Y = np.array([0.0, 0.0, 1.0])
    out = sf.curvature_op(HYP, x, X, Y, Y)
    np.testing.assert_allclose(out, [0.0, -1.0, 0.0], atol=1e-15)


def test_curvature_antisymmetry():
    rng = np.random.default_rng(4)
    x = random_point(SPHERE, rng)
    X = random_tangent(SPHERE, x, rng)
    Z = random_tangent(SPHERE, x, rng)
    out = sf.curvature_op(SPHERE, x, X, X, Z)
    assert np.max(np.abs(out)) <= 1e-14


@pytest.mark.parametrize("spec", ALL)
def test_curvature_pair_symmetry(spec):
    # <R(v3,v4)v2, v1> = <R(v1,v2)v4, v3> on random tangent quadruples
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        x = random_point(spec, rng)
        v = [random_tangent(spec, x, rng, unit=True) for _ in range(4)]
        lhs = sf.inner(spec, x, sf.curvature_op(spec, x, v[2], v[3], v[1]), v[0])
        rhs = sf.inner(spec, x, sf.curvature_op(spec, x, v[0], v[1], v[3]), v[2])
        worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-12
