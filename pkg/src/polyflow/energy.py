"""Energy ladder and norms: E, E2, E3, Etilde4 and L^p tension norms.

Conventions: E = (1/2) Int |dphi|^2, E2 = (1/2) Int |tau|^2,
E3 = (1/2) Int |nabla tau|^2, Etilde4 = (1/2) Int |Delta tau|^2.  The
fourth-rung functional reported here is the iterated-Laplacian part only,
which is a lower bound for the full fourth energy (the omitted exterior
derivative term is a nonnegative integral).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import space_form as sf
from .domain_grid import FrameField, integrate
from .pullback import (
    MapField,
    differential,
    nabla_bar,
    rough_laplacian,
    tension,
    tritension_general,
)

__all__ = ["EnergyReport", "energy_report", "energy_k", "e4_lower_bound_check"]


@dataclass
class EnergyReport:
    E: float
    E2: float
    E3: float
    Etilde4: float
    Lp_tension: dict = field(default_factory=dict)
    Lp_laplacian: dict = field(default_factory=dict)
    sup_tau: float = 0.0
    sup_tau3: float = 0.0
    mean_curvature_sup: float = 0.0
    volume: float = 0.0

    def to_dict(self) -> dict:
        return {
            "E": self.E,
            "E2": self.E2,
            "E3": self.E3,
            "Etilde4": self.Etilde4,
            "Lp_tension": {str(p): v for p, v in self.Lp_tension.items()},
            "Lp_laplacian": {str(p): v for p, v in self.Lp_laplacian.items()},
            "sup_tau": self.sup_tau,
            "sup_tau3": self.sup_tau3,
            "mean_curvature_sup": self.mean_curvature_sup,
            "volume": self.volume,
        }


def _dirichlet_density(phi: MapField, frame: FrameField) -> np.ndarray:
    dphi = differential(phi, frame)
    out = np.zeros(phi.grid.shape)
    for d in dphi:
        out += sf.inner(phi.spec, phi.values, d.values, d.values)
    return out


def _grad_section_density(phi, frame, V) -> np.ndarray:
    out = np.zeros(phi.grid.shape)
    for i in range(phi.grid.dims):
        g = nabla_bar(V, i, frame)
        out += sf.inner(phi.spec, phi.values, g.values, g.values)
    return out


def energy_k(phi: MapField, frame: FrameField, k: int) -> float:
    """k-th energy of the ladder for k in {1, 2, 3}, over the given frame."""
    grid = phi.grid
    if k == 1:
        return 0.5 * integrate(grid, frame, _dirichlet_density(phi, frame))
    tau = tension(phi, frame)
    if k == 2:
        return 0.5 * integrate(grid, frame, tau.norm_field() ** 2)
    if k == 3:
        return 0.5 * integrate(grid, frame, _grad_section_density(phi, frame, tau))
    raise ValueError(f"energy order must be 1, 2 or 3, got {k}")


def energy_report(
    phi: MapField,
    frame: FrameField,
    p_list=(2.0, 4.0),
    laplacian_p_list=(),
    with_tritension: bool = True,
) -> EnergyReport:
    """Evaluate the full energy ladder and the requested L^p tension norms.

    ``with_tritension=False`` skips the tritension field (sup_tau3 reads 0);
    flow traces use this since they track the descent norm separately.
    """
    grid = phi.grid
    tau = tension(phi, frame)
    tau_norm = tau.norm_field()
    lap = rough_laplacian(tau, frame)
    lap_norm = lap.norm_field()
    sup_tau3 = 0.0
    if with_tritension:
        sup_tau3 = float(np.max(tritension_general(phi, frame).norm_field()))

    volume = integrate(grid, frame, np.ones(grid.shape))
    report = EnergyReport(
        E=0.5 * integrate(grid, frame, _dirichlet_density(phi, frame)),
        E2=0.5 * integrate(grid, frame, tau_norm**2),
        E3=0.5 * integrate(grid, frame, _grad_section_density(phi, frame, tau)),
        Etilde4=0.5 * integrate(grid, frame, lap_norm**2),
        sup_tau=float(np.max(tau_norm)),
        sup_tau3=sup_tau3,
        volume=volume,
    )
    report.mean_curvature_sup = report.sup_tau / grid.dims
    for p in p_list:
        report.Lp_tension[float(p)] = integrate(grid, frame, tau_norm ** float(p))
    for p in laplacian_p_list:
        report.Lp_laplacian[float(p)] = integrate(grid, frame, lap_norm ** float(p))
    return report


def e4_lower_bound_check(phi: MapField, frame: FrameField) -> float:
    """Implemented lower bound for the fourth energy.

    Returns Etilde4 = (1/2) Int |Delta tau|^2.  The full fourth energy adds
    a nonnegative exterior-derivative term that is out of scope here, so
    the returned value bounds it from below.
    """
    tau = tension(phi, frame)
    lap = rough_laplacian(tau, frame)
    return 0.5 * integrate(phi.grid, frame, lap.norm_field() ** 2)
