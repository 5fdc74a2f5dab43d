"""Exact geometry of constant-curvature targets.

Three models of the simply connected space form ``N(c)`` are supported, all
represented through an ambient vector space so that the Levi-Civita
connection is "differentiate in the ambient, then project":

* ``Flat`` (c = 0): Euclidean space R^n itself.
* ``Sphere`` (c > 0): the sphere of radius 1/sqrt(c) in R^(n+1), i.e. the
  points with <x, x> = 1/c in the Euclidean form.
* ``Hyperboloid`` (c < 0): the upper sheet <x, x>_L = 1/c, x0 > 0 in
  Minkowski space R^(n,1), where <u, v>_L = -u0*v0 + sum_i ui*vi.

Points and tangent vectors are plain ``numpy`` arrays whose last axis holds
the ambient coordinates; every function broadcasts over leading axes, so a
whole grid of points can be processed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegeneratePoint

__all__ = [
    "Model",
    "SpaceFormSpec",
    "ambient_form",
    "project_point",
    "project_tangent",
    "inner",
    "exp_map",
    "curvature_op",
]


class Model(str, Enum):
    FLAT = "Flat"
    SPHERE = "Sphere"
    HYPERBOLOID = "Hyperboloid"


@dataclass(frozen=True)
class SpaceFormSpec:
    """Target space form: curvature ``c`` and dimension ``n``.

    The model is forced by the sign of ``c``; ``ambient_dim`` is ``n`` for
    the flat model and ``n + 1`` otherwise.
    """

    c: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if not np.isfinite(self.c):
            raise ValueError("curvature must be finite")

    @property
    def model(self) -> Model:
        if self.c == 0.0:
            return Model.FLAT
        return Model.SPHERE if self.c > 0.0 else Model.HYPERBOLOID

    @property
    def ambient_dim(self) -> int:
        return self.n if self.c == 0.0 else self.n + 1


def ambient_form(spec: SpaceFormSpec, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Ambient bilinear form: Euclidean dot, or Minkowski for c < 0."""
    dot = np.sum(u * v, axis=-1)
    if spec.model is Model.HYPERBOLOID:
        dot = dot - 2.0 * u[..., 0] * v[..., 0]
    return dot


def project_point(spec: SpaceFormSpec, x: np.ndarray) -> np.ndarray:
    """Radially rescale ``x`` onto the model manifold.

    Flat returns ``x`` unchanged.  On the quadric models the scaling factor
    is 1/sqrt(|c| * |Q(x)|) with Q the ambient quadratic form, which lands
    exactly on Q = 1/c.  Raises :class:`DegeneratePoint` when the quadratic
    form of ``x`` has no valid rescaling (null or wrong-signature input,
    or x0 <= 0 on the hyperboloid).
    """
    x = np.asarray(x, dtype=float)
    if spec.model is Model.FLAT:
        return x
    q = ambient_form(spec, x, x)
    if spec.model is Model.SPHERE:
        if np.any(q <= 0.0):
            raise DegeneratePoint("cannot project a null vector onto the sphere")
    else:
        if np.any(q >= 0.0) or np.any(x[..., 0] <= 0.0):
            raise DegeneratePoint(
                "hyperboloid projection needs <x,x>_L < 0 and x0 > 0"
            )
    scale = 1.0 / np.sqrt(np.abs(spec.c) * np.abs(q))
    return x * scale[..., None]


def project_tangent(spec: SpaceFormSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the tangent space at ``x``."""
    if spec.model is Model.FLAT:
        return np.asarray(v, dtype=float)
    return v - spec.c * ambient_form(spec, x, v)[..., None] * x


def inner(spec: SpaceFormSpec, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Fiber metric h on tangent vectors at ``x``.

    Coincides with the ambient form; positive definite on tangent spaces of
    every model.  ``x`` is accepted for signature symmetry and unused.
    """
    return ambient_form(spec, u, v)


def norm(spec: SpaceFormSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pointwise norm |v| = sqrt(h(v, v))."""
    return np.sqrt(np.maximum(inner(spec, x, v, v), 0.0))


def _stable_ratio(fn, z: np.ndarray) -> np.ndarray:
    # fn(z)/z with the z -> 0 limit patched to 1 (both sin and sinh).
    small = np.abs(z) < 1e-12
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0, fn(safe) / safe)


def exp_map(spec: SpaceFormSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Geodesic exponential: follow the geodesic from ``x`` with velocity ``v``.

    Closed forms: straight line (flat), great-circle rotation (sphere),
    hyperbolic rotation (hyperboloid).  The result is re-projected onto the
    model so the constraint holds to machine precision even for large ``v``.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.model is Model.FLAT:
        return x + v
    rho = np.sqrt(np.abs(spec.c)) * norm(spec, x, v)
    if spec.model is Model.SPHERE:
        out = np.cos(rho)[..., None] * x + _stable_ratio(np.sin, rho)[..., None] * v
    else:
        out = np.cosh(rho)[..., None] * x + _stable_ratio(np.sinh, rho)[..., None] * v
    return project_point(spec, out)


def curvature_op(
    spec: SpaceFormSpec,
    x: np.ndarray,
    X: np.ndarray,
    Y: np.ndarray,
    Z: np.ndarray,
) -> np.ndarray:
    """Constant-curvature tensor R(X, Y)Z = c * (h(Y,Z) X - h(X,Z) Y)."""
    if spec.c == 0.0:
        return np.zeros(np.broadcast(X, Y, Z).shape)
    hYZ = inner(spec, x, Y, Z)[..., None]
    hXZ = inner(spec, x, X, Z)[..., None]
    return spec.c * (hYZ * X - hXZ * Y)


def constraint_residual(spec: SpaceFormSpec, x: np.ndarray) -> np.ndarray:
    """Absolute deviation from the model constraint (0 for flat)."""
    if spec.model is Model.FLAT:
        return np.zeros(np.asarray(x).shape[:-1])
    return np.abs(ambient_form(spec, x, x) - 1.0 / spec.c)
