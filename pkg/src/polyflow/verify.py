"""Numerical verification of the variational and pointwise identities.

This module checks, on discrete data, the statements the operator stack is
supposed to satisfy: the first-variation formulas of the three energies,
the variation formula for the tension field, orthogonality of the tension
field along isometric immersions, curvature-tensor symmetry, the Bochner
identity for |tau|^2, the curvature sign inequality for nonpositively
curved targets, the Kato inequality, the cut-off construction and the
resulting Caccioppoli-type inequality.

Failures of the pointwise audits are reported, not raised; the variation
checks return residuals for the caller to judge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import space_form as sf
from .domain_grid import (
    Differentiation,
    DomainGrid,
    FrameField,
    MetricMode,
    integrate,
    scalar_gradient,
    scalar_laplacian,
)
from .energy import energy_k
from .errors import MetricModeError, NotTriharmonic, RadiusTooLarge
from .pullback import (
    MapField,
    Section,
    bitension,
    curvature_contraction,
    differential,
    nabla_bar,
    rough_laplacian,
    tension,
    tritension_general,
)

__all__ = [
    "AuditCheck",
    "AuditReport",
    "CutoffField",
    "vary",
    "first_variation_residual",
    "tension_variation_residual",
    "pointwise_identity_audit",
    "cutoff",
    "caccioppoli_audit",
    "random_tangent_section",
]


@dataclass
class AuditCheck:
    name: str
    max_residual: float
    nodes_failed: int
    tolerance: float
    passed: bool
    skipped: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "nodes_failed": self.nodes_failed,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "skipped": self.skipped,
            "note": self.note,
        }


@dataclass
class AuditReport:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks.values())

    def to_dict(self) -> dict:
        return {name: c.to_dict() for name, c in self.checks.items()}


@dataclass
class CutoffField:
    """Smooth bump: 1 on the ball of radius r, 0 outside radius 2r."""

    eta: np.ndarray
    center: tuple
    r: float
    distance: np.ndarray = field(repr=False, default=None)
    grid: DomainGrid = field(repr=False, default=None)

    def ball_mask(self) -> np.ndarray:
        return self.distance <= self.r


def scheme_tolerance(grid: DomainGrid) -> float:
    """Baseline residual tolerance of the differentiation backend."""
    h = max(grid.spacings)
    kind = grid.spec.differentiation
    if kind is Differentiation.CENTRAL_FD2:
        return 2.0 * h**2
    if kind is Differentiation.CENTRAL_FD4:
        return 2.0 * h**4
    return 1e-8


def vary(phi: MapField, V: Section, t: float) -> MapField:
    """Geodesic variation phi_t(x) = exp_{phi(x)}(t V(x))."""
    if t == 0.0:
        return phi.copy()
    return MapField(
        values=sf.exp_map(phi.spec, phi.values, t * V.values),
        grid=phi.grid,
        spec=phi.spec,
    )


def _require_prescribed(frame: FrameField):
    if frame.mode is MetricMode.INDUCED:
        raise MetricModeError(
            "variation checks need a fixed prescribed metric; an induced "
            "metric would change along the variation"
        )


_TAU_K = {1: tension, 2: bitension, 3: tritension_general}


def first_variation_residual(
    phi: MapField, V: Section, frame: FrameField, k: int, t: float
) -> float:
    """Central-difference check of dE_k/dt = -Int <tau_k, V>.

    Returns |FD(t) - A| / (1 + |A|) with FD the symmetric quotient of E_k
    along the geodesic variation and A the analytic pairing.  Decays at
    O(t^2) plus the scheme error, except for families on which E_k is
    polynomial in t (flat targets), where the quotient is exact.
    """
    _require_prescribed(frame)
    if k not in _TAU_K:
        raise ValueError(f"variation order must be 1, 2 or 3, got {k}")
    tau_k = _TAU_K[k](phi, frame)
    pairing = sf.inner(phi.spec, phi.values, tau_k.values, V.values)
    analytic = -integrate(phi.grid, frame, pairing)
    e_plus = energy_k(vary(phi, V, t), frame, k)
    e_minus = energy_k(vary(phi, V, -t), frame, k)
    fd = (e_plus - e_minus) / (2.0 * t)
    return abs(fd - analytic) / (1.0 + abs(analytic))


def tension_variation_residual(
    phi: MapField, V: Section, frame: FrameField, t: float
) -> float:
    """Sup-norm check of d/dt tau(phi_t)|_0 = -Delta V + sum_j R(V, dphi(e_j)) dphi(e_j).

    The time derivative is the projected ambient central difference of the
    tension fields of the two varied maps.
    """
    _require_prescribed(frame)
    tau_plus = tension(vary(phi, V, t), frame)
    tau_minus = tension(vary(phi, V, -t), frame)
    lhs = sf.project_tangent(
        phi.spec, phi.values, (tau_plus.values - tau_minus.values) / (2.0 * t)
    )
    rhs = -rough_laplacian(V, frame).values + curvature_contraction(V, frame).values
    return float(np.max(sf.norm(phi.spec, phi.values, lhs - rhs)))


def _fd2_gradient(grid: DomainGrid, frame: FrameField, f: np.ndarray) -> np.ndarray:
    """Frame gradient of a scalar using the 2nd-order stencil unconditionally.

    Used for fields like |alpha| that are merely Lipschitz at zeros of
    alpha: spectral differentiation of a kinked scalar rings globally,
    while the central difference quotient stays bounded by the local
    Lipschitz constant.
    """
    out = np.empty(grid.shape + (grid.dims,))
    df = []
    for a in range(grid.dims):
        h = grid.spacings[a]
        df.append((np.roll(f, -1, axis=a) - np.roll(f, 1, axis=a)) / (2.0 * h))
    for i in range(grid.dims):
        acc = np.zeros(grid.shape)
        for a in range(grid.dims):
            acc += frame.e[..., i, a] * df[a]
        out[..., i] = acc
    return out


def _kato_check(name, phi, frame, alpha: Section) -> AuditCheck:
    grid = phi.grid
    grad_sections = [nabla_bar(alpha, i, frame) for i in range(grid.dims)]
    rhs_sq = np.zeros(grid.shape)
    for g in grad_sections:
        rhs_sq += sf.inner(phi.spec, phi.values, g.values, g.values)
    rhs = np.sqrt(np.maximum(rhs_sq, 0.0))
    a_norm = alpha.norm_field()
    lhs = np.sqrt(np.sum(_fd2_gradient(grid, frame, a_norm) ** 2, axis=-1))
    eligible = a_norm > 1e-6
    h = max(grid.spacings)
    tol = 1e-8 + 10.0 * h**2 * float(np.max(rhs, initial=0.0))
    excess = np.where(eligible, lhs - rhs, -np.inf)
    max_residual = float(np.max(excess)) if np.any(eligible) else 0.0
    failed = int(np.sum(excess > tol))
    return AuditCheck(
        name=name,
        max_residual=max(max_residual, 0.0),
        nodes_failed=failed,
        tolerance=tol,
        passed=failed == 0,
        note="nodes with |alpha| <= 1e-6 excluded",
    )


def pointwise_identity_audit(
    phi: MapField, frame: FrameField, seed: int = 0, n_quadruples: int = 1000
) -> AuditReport:
    """Run the bundled pointwise checks and report residuals.

    Checks: tension orthogonality (isometric data only), curvature-tensor
    symmetry on random tangent quadruples, the Bochner identity
    <tau, Delta tau> = (1/2) Delta |tau|^2 + |nabla tau|^2, the sign of the
    curvature contraction for c <= 0, and the Kato inequality for tau and
    Delta tau.
    """
    grid, spec = phi.grid, phi.spec
    report = AuditReport()
    base_tol = scheme_tolerance(grid)

    tau = tension(phi, frame)
    dphi = differential(phi, frame)
    grad_tau = [nabla_bar(tau, i, frame) for i in range(grid.dims)]
    lap_tau = rough_laplacian(tau, frame)
    tau_sq = sf.inner(spec, phi.values, tau.values, tau.values)
    grad_tau_sq = np.zeros(grid.shape)
    for g in grad_tau:
        grad_tau_sq += sf.inner(spec, phi.values, g.values, g.values)

    # (a) along isometric immersions the tension field is normal to the
    # image: sum_j h(nabla_{e_j} tau, dphi(e_j)) = -h(tau, tau).
    if frame.mode is MetricMode.INDUCED:
        acc = tau_sq.copy()
        for g, d in zip(grad_tau, dphi):
            acc += sf.inner(spec, phi.values, g.values, d.values)
        tol = base_tol * (1.0 + float(np.max(tau_sq)))
        resid = float(np.max(np.abs(acc)))
        failed = int(np.sum(np.abs(acc) > tol))
        report.checks["tension_orthogonality"] = AuditCheck(
            "tension_orthogonality", resid, failed, tol, failed == 0
        )
    else:
        report.checks["tension_orthogonality"] = AuditCheck(
            "tension_orthogonality",
            0.0,
            0,
            0.0,
            True,
            skipped=True,
            note="needs an induced (isometric) metric",
        )

    # (b) pair symmetry of the curvature tensor on random unit tangent
    # quadruples (unit scale keeps the roundoff of the exact identity
    # comparable to the 1e-12 tolerance).
    rng = np.random.default_rng(seed)
    flat_pts = phi.values.reshape(-1, spec.ambient_dim)
    idx = rng.integers(0, flat_pts.shape[0], size=n_quadruples)
    x = flat_pts[idx]
    vs = []
    for _ in range(4):
        v = sf.project_tangent(spec, x, rng.standard_normal(x.shape))
        scale = np.maximum(np.sqrt(np.maximum(sf.inner(spec, x, v, v), 0.0)), 1e-12)
        vs.append(v / scale[..., None])
    lhs = sf.inner(spec, x, sf.curvature_op(spec, x, vs[2], vs[3], vs[1]), vs[0])
    rhs = sf.inner(spec, x, sf.curvature_op(spec, x, vs[0], vs[1], vs[3]), vs[2])
    sym_resid = np.abs(lhs - rhs)
    tol = 1e-12 * (1.0 + abs(spec.c))
    failed = int(np.sum(sym_resid > tol))
    report.checks["curvature_symmetry"] = AuditCheck(
        "curvature_symmetry", float(np.max(sym_resid)), failed, tol, failed == 0,
        note=f"{n_quadruples} random tangent quadruples",
    )

    # (c) Bochner identity for the scalar |tau|^2 (positive Laplacian).
    pairing = sf.inner(spec, phi.values, tau.values, lap_tau.values)
    bochner = pairing - 0.5 * scalar_laplacian(grid, frame, tau_sq) - grad_tau_sq
    tol = base_tol * (1.0 + float(np.max(np.abs(pairing))) + float(np.max(grad_tau_sq)))
    resid = float(np.max(np.abs(bochner)))
    failed = int(np.sum(np.abs(bochner) > tol))
    report.checks["bochner_identity"] = AuditCheck(
        "bochner_identity", resid, failed, tol, failed == 0
    )

    # (d) for c <= 0 the curvature contraction against Delta tau has a sign:
    # c * (sum_i <Delta tau, dphi(e_i)>^2 - |Delta tau|^2 |dphi|^2) >= 0.
    lap_sq = sf.inner(spec, phi.values, lap_tau.values, lap_tau.values)
    dphi_sq = np.zeros(grid.shape)
    proj_sq = np.zeros(grid.shape)
    for d in dphi:
        dphi_sq += sf.inner(spec, phi.values, d.values, d.values)
        proj_sq += sf.inner(spec, phi.values, lap_tau.values, d.values) ** 2
    quantity = spec.c * (proj_sq - lap_sq * dphi_sq)
    if spec.c <= 0.0:
        tol = 1e-10 * (1.0 + float(np.max(lap_sq * dphi_sq)))
        worst = float(np.min(quantity))
        failed = int(np.sum(quantity < -tol))
        report.checks["curvature_sign"] = AuditCheck(
            "curvature_sign", max(-worst, 0.0), failed, tol, failed == 0
        )
    else:
        report.checks["curvature_sign"] = AuditCheck(
            "curvature_sign",
            0.0,
            0,
            0.0,
            True,
            skipped=True,
            note="sign statement applies to c <= 0 only",
        )

    # (e) Kato inequality |grad |alpha|| <= |nabla alpha| where alpha != 0.
    report.checks["kato_tension"] = _kato_check("kato_tension", phi, frame, tau)
    report.checks["kato_tension_laplacian"] = _kato_check(
        "kato_tension_laplacian", phi, frame, lap_tau
    )
    return report


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (6.0 * u**2 - 15.0 * u + 10.0)


def cutoff(grid: DomainGrid, center, r: float) -> CutoffField:
    """Quintic-smoothstep bump around a node.

    eta = 1 on the ball of radius r, 0 outside radius 2r, and the gradient
    bound max |grad eta| <= 15/(8r) < 2/r holds with margin.
    """
    if not 2.0 * r < min(grid.spec.lengths) / 2.0:
        raise RadiusTooLarge(
            f"need 2r < {min(grid.spec.lengths) / 2.0:.6g}, got r = {r:.6g}"
        )
    d = grid.periodic_distance(center)
    eta = _smoothstep((2.0 * r - d) / r)
    center_t = tuple(np.atleast_1d(center).astype(int).tolist())
    return CutoffField(eta=eta, center=center_t, r=float(r), distance=d, grid=grid)


def caccioppoli_audit(
    phi: MapField, frame: FrameField, eta: CutoffField, eps: float
) -> float:
    """Margin of the localized energy inequality for triharmonic states.

    For a map with vanishing tritension field into a target with c <= 0,

        (1/eps) Int |Delta tau|^2 |grad eta|^2 - c Int |tau|^4 |grad eta|^2
        >= (1-eps) Int_{B_r} |nabla Delta tau|^2
           - (c/4) Int_{B_r} |grad |tau|^2|^2
           - c Int_{B_r} |tau|^2 |nabla tau|^2.

    Returns LHS - RHS; nonnegative up to roundoff when the preconditions
    hold.  Raises :class:`NotTriharmonic` if sup |tau3| > 1e-5 or c > 0.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    spec, grid = phi.spec, phi.grid
    if spec.c > 0.0:
        raise NotTriharmonic("inequality requires nonpositive curvature")
    tau3_sup = float(np.max(tritension_general(phi, frame).norm_field()))
    if tau3_sup > 1e-5:
        raise NotTriharmonic(f"sup |tau3| = {tau3_sup:.3e} exceeds 1e-5")

    tau = tension(phi, frame)
    tau_norm_sq = sf.inner(spec, phi.values, tau.values, tau.values)
    lap = rough_laplacian(tau, frame)
    lap_sq = sf.inner(spec, phi.values, lap.values, lap.values)
    grad_lap_sq = np.zeros(grid.shape)
    for i in range(grid.dims):
        g = nabla_bar(lap, i, frame)
        grad_lap_sq += sf.inner(spec, phi.values, g.values, g.values)
    grad_tau_sq = np.zeros(grid.shape)
    for i in range(grid.dims):
        g = nabla_bar(tau, i, frame)
        grad_tau_sq += sf.inner(spec, phi.values, g.values, g.values)

    grad_eta_sq = np.sum(scalar_gradient(grid, frame, eta.eta) ** 2, axis=-1)
    grad_tau_norm_sq = np.sum(
        scalar_gradient(grid, frame, tau_norm_sq) ** 2, axis=-1
    )
    ball = eta.ball_mask().astype(float)

    c = spec.c
    lhs = (1.0 / eps) * integrate(grid, frame, lap_sq * grad_eta_sq) - c * integrate(
        grid, frame, tau_norm_sq**2 * grad_eta_sq
    )
    rhs = (
        (1.0 - eps) * integrate(grid, frame, grad_lap_sq * ball)
        - 0.25 * c * integrate(grid, frame, grad_tau_norm_sq * ball)
        - c * integrate(grid, frame, tau_norm_sq * grad_tau_sq * ball)
    )
    return lhs - rhs


def random_tangent_section(
    phi: MapField, seed: int, max_mode: int = 2, amplitude: float = 0.3
) -> Section:
    """Seeded band-limited random section along ``phi``.

    Each ambient component is a small trigonometric polynomial (modes up to
    ``max_mode`` per axis); the field is projected to the tangent spaces and
    rescaled to the requested sup-norm.
    """
    grid, spec = phi.grid, phi.spec
    rng = np.random.default_rng(seed)
    angles = [
        2.0 * np.pi * grid.coords[a] / grid.spec.lengths[a] for a in range(grid.dims)
    ]
    values = np.zeros(grid.shape + (spec.ambient_dim,))
    for comp in range(spec.ambient_dim):
        f = np.zeros(grid.shape)
        for _ in range(4):
            modes = rng.integers(-max_mode, max_mode + 1, size=grid.dims)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            arg = np.full(grid.shape, phase)
            for a in range(grid.dims):
                arg = arg + modes[a] * angles[a]
            f = f + rng.standard_normal() * np.cos(arg)
        values[..., comp] = f
    values = sf.project_tangent(spec, phi.values, values)
    sup = float(np.max(sf.norm(spec, phi.values, values)))
    if sup > 0.0:
        values *= amplitude / sup
    return Section(values=values, base=phi)
