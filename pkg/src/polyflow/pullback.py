"""Operator calculus on vector fields along a map.

Everything acting on sections of the pullback bundle lives here: the
differential, the induced connection (ambient derivative followed by the
tangent projection), the nonnegative connection Laplacian, the curvature
contraction, the Jacobi operator, and the tension / bitension / tritension
fields.  Sections are stored in ambient coordinates and re-projected after
every derivative, so tangency is a checkable invariant instead of a
representation assumption.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import space_form as sf
from .domain_grid import DomainGrid, FrameField, MetricMode, SPECTRAL_REL_CUTOFF
from .errors import NotIsometric

__all__ = [
    "MapField",
    "Section",
    "differential",
    "nabla_bar",
    "tension",
    "rough_laplacian",
    "iterated_laplacian",
    "curvature_contraction",
    "jacobi",
    "bitension",
    "tritension_general",
    "tritension_space_form",
]

ISOMETRY_TOL = 1e-6


@dataclass
class MapField:
    """Discrete map into the target: one ambient point per grid node."""

    values: np.ndarray  # grid.shape + (ambient_dim,)
    grid: DomainGrid = field(repr=False, default=None)
    spec: sf.SpaceFormSpec = None

    def constraint_residual(self) -> float:
        return float(np.max(sf.constraint_residual(self.spec, self.values)))

    def spectral_floor(self) -> float:
        """Absolute Fourier-coefficient floor for derivatives of this map.

        Fields derived from the map inherit its roundoff scale; coefficients
        below this floor are indistinguishable from noise and would be
        amplified k^6-fold by the tritension chain.
        """
        return SPECTRAL_REL_CUTOFF * max(1.0, float(np.max(np.abs(self.values))))

    def copy(self) -> "MapField":
        return MapField(values=self.values.copy(), grid=self.grid, spec=self.spec)


@dataclass
class Section:
    """Vector field along a map, tangent to the target at each node."""

    values: np.ndarray
    base: MapField = field(repr=False, default=None)

    def tangency_residual(self) -> float:
        spec = self.base.spec
        if spec.model is sf.Model.FLAT:
            return 0.0
        return float(
            np.max(np.abs(sf.ambient_form(spec, self.base.values, self.values)))
        )

    def norm_field(self) -> np.ndarray:
        """Pointwise norm |V| over the grid."""
        return sf.norm(self.base.spec, self.base.values, self.values)


def _project(phi: MapField, values: np.ndarray) -> np.ndarray:
    return sf.project_tangent(phi.spec, phi.values, values)


def _directional(phi: MapField, values: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """sum_a coeffs[..., a] * d_a(values), with the map's noise floor."""
    grid = phi.grid
    floor = phi.spectral_floor()
    out = np.zeros_like(values)
    for a in range(grid.dims):
        out += coeffs[..., a, None] * grid.deriv(values, a, floor=floor)
    return out


def differential(phi: MapField, frame: FrameField) -> list:
    """Frame components dphi(e_i) of the differential, as Sections."""
    return [
        Section(values=_project(phi, _directional(phi, phi.values, frame.e[..., i, :])), base=phi)
        for i in range(phi.grid.dims)
    ]


def nabla_bar(V: Section, i: int, frame: FrameField) -> Section:
    """Induced connection along the i-th frame direction.

    Differentiate the ambient representative along e_i, then project back
    onto the tangent space of the target.
    """
    phi = V.base
    return Section(
        values=_project(phi, _directional(phi, V.values, frame.e[..., i, :])),
        base=phi,
    )


def _nabla_div_correction(V: Section, i: int, frame: FrameField) -> np.ndarray:
    """Ambient values of the connection along nabla_{e_i} e_i."""
    phi = V.base
    return _project(phi, _directional(phi, V.values, frame.div_terms[..., i, :]))


def tension(phi: MapField, frame: FrameField) -> Section:
    """Trace of the second fundamental form.

    tau = sum_i { nabla_{e_i}(dphi(e_i)) - dphi(nabla_{e_i} e_i) }.
    Vanishes exactly on geodesics / totally geodesic maps.
    """
    dphi = differential(phi, frame)
    out = np.zeros_like(phi.values)
    for i in range(phi.grid.dims):
        out += nabla_bar(dphi[i], i, frame).values
        out -= _project(phi, _directional(phi, phi.values, frame.div_terms[..., i, :]))
    return Section(values=out, base=phi)


def rough_laplacian(V: Section, frame: FrameField) -> Section:
    """Nonnegative connection Laplacian.

    Delta V = -sum_i { nabla_{e_i} nabla_{e_i} V - nabla_{nabla_{e_i} e_i} V },
    so on the flat circle Delta V = -V'' componentwise.
    """
    phi = V.base
    out = np.zeros_like(V.values)
    for i in range(phi.grid.dims):
        out -= nabla_bar(nabla_bar(V, i, frame), i, frame).values
        out += _nabla_div_correction(V, i, frame)
    return Section(values=out, base=phi)


def iterated_laplacian(V: Section, ell: int, frame: FrameField) -> Section:
    """(ell - 1)-fold application of the rough Laplacian; ell = 1 is V."""
    if ell < 1:
        raise ValueError(f"iteration index must be >= 1, got {ell}")
    out = V
    for _ in range(ell - 1):
        out = rough_laplacian(out, frame)
    return out


def curvature_contraction(V: Section, frame: FrameField) -> Section:
    """Curvature term sum_i R(V, dphi(e_i)) dphi(e_i); zero for flat targets."""
    phi = V.base
    if phi.spec.c == 0.0:
        return Section(values=np.zeros_like(V.values), base=phi)
    dphi = differential(phi, frame)
    out = np.zeros_like(V.values)
    for d in dphi:
        out += sf.curvature_op(phi.spec, phi.values, V.values, d.values, d.values)
    return Section(values=out, base=phi)


def jacobi(V: Section, frame: FrameField) -> Section:
    """Jacobi operator J(V) = Delta V - sum_i R(V, dphi(e_i)) dphi(e_i)."""
    lap = rough_laplacian(V, frame)
    curv = curvature_contraction(V, frame)
    return Section(values=lap.values - curv.values, base=V.base)


def bitension(phi: MapField, frame: FrameField) -> Section:
    """Bitension field: the Jacobi operator applied to the tension field."""
    return jacobi(tension(phi, frame), frame)


def tritension_general(phi: MapField, frame: FrameField) -> Section:
    """Tritension field for an arbitrary smooth map:

    tau3 = J(Delta tau) - sum_i R(nabla_{e_i} tau, tau) dphi(e_i).
    """
    tau = tension(phi, frame)
    out = jacobi(rough_laplacian(tau, frame), frame).values
    if phi.spec.c != 0.0:
        dphi = differential(phi, frame)
        for i in range(phi.grid.dims):
            grad_tau = nabla_bar(tau, i, frame)
            out -= sf.curvature_op(
                phi.spec, phi.values, grad_tau.values, tau.values, dphi[i].values
            )
    return Section(values=out, base=phi)


def _isometry_deviation(phi: MapField, frame: FrameField) -> float:
    from .domain_grid import induced_metric

    return float(np.max(np.abs(induced_metric(phi).g - frame.metric.g)))


def tritension_space_form(phi: MapField, frame: FrameField) -> Section:
    """Tritension field specialized to isometric immersions:

    tau3 = Delta^2 tau - sum_i R(Delta tau, dphi(e_i)) dphi(e_i)
           - c h(tau, tau) tau.

    Requires the domain metric to be the pullback metric (mode Induced, or
    a prescribed metric matching it to 1e-6); the simplification relies on
    the tension field being normal to the image, which fails quantitatively
    for non-isometric maps.
    """
    if frame.mode is not MetricMode.INDUCED:
        dev = _isometry_deviation(phi, frame)
        if dev > ISOMETRY_TOL:
            raise NotIsometric(
                f"prescribed metric deviates from the pullback metric by {dev:.3e}"
            )
    tau = tension(phi, frame)
    lap = rough_laplacian(tau, frame)
    out = rough_laplacian(lap, frame).values
    out -= curvature_contraction(lap, frame).values
    if phi.spec.c != 0.0:
        h_tt = sf.inner(phi.spec, phi.values, tau.values, tau.values)
        out -= phi.spec.c * h_tt[..., None] * tau.values
    return Section(values=out, base=phi)
