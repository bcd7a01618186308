"""Betti-type integral identity, surface traction and corner-term diagnostics."""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import forward
from .cgo import CgoParams, cgo_field, choose_p_perp, make_cgo, sector_integral
from .forward import FieldDomainError, MediumScatterer, ScatteringSolution
from .geometry import ConvexPolygon, direction_and_delta0, vertex_cone, vertex_to_nonadjacent_edge_distances
from .material import DensityField, IncidentWave, LameParameters, incident_field, rot90

logger = logging.getLogger(__name__)

FD_STEP_FRACTION = 1e-5
BOUNDARY_NODES_PER_EDGE = 256


@dataclass(frozen=True)
class TractionContext:
    params: LameParameters
    normal: np.ndarray
    normal_perp: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        t = np.asarray(self.normal_perp, dtype=float)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "normal_perp", t)
        if np.any(np.abs(np.hypot(n[..., 0], n[..., 1]) - 1) > 1e-10) or np.any(np.abs(np.sum(n * t, axis=-1)) > 1e-10):
            raise ValueError("normal and normal_perp must be orthonormal")


def traction_context(params: LameParameters, normal) -> TractionContext:
    """Context with ``normal_perp`` the +90 degree rotation of ``normal``."""
    n = np.asarray(normal, dtype=float)
    n = n / np.hypot(n[..., 0], n[..., 1])[..., None]
    return TractionContext(params, n, rot90(n))


def field_gradient(field: Callable, x, step: float) -> np.ndarray:
    """Centred-difference Jacobian ``J[..., i, j] = d u_i / d x_j``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        cols.append((field(x + e) - field(x - e)) / (2 * step))
    return np.stack(cols, axis=-1)


def traction_from_gradient(J: np.ndarray, ctx: TractionContext) -> np.ndarray:
    """``2 mu d_nu u + lam nu div u + mu (d2 u1 - d1 u2) nu_perp``."""
    lam, mu = ctx.params.lam, ctx.params.mu
    nu, nup = ctx.normal, ctx.normal_perp
    dnu = np.einsum("...ij,...j->...i", J, nu)
    div = J[..., 0, 0] + J[..., 1, 1]
    curl = J[..., 0, 1] - J[..., 1, 0]
    return 2 * mu * dnu + lam * div[..., None] * nu + mu * curl[..., None] * nup


def surface_traction(field: Callable, x, ctx: TractionContext, step: float | None = None, wavelength: float = 1.0, domain: ConvexPolygon | None = None) -> np.ndarray:
    """Traction ``T_nu(u)`` of a callable field by centred differences.

    The default step is ``1e-5 * wavelength``.  With ``domain`` given, every
    stencil point must lie in it.
    """
    h = FD_STEP_FRACTION * wavelength if step is None else float(step)
    x = np.asarray(x, dtype=float)
    if domain is not None:
        offs = np.array([[h, 0], [-h, 0], [0, h], [0, -h]])
        pts = x[..., None, :] + offs
        if not np.all(domain.contains(pts)):
            raise FieldDomainError("traction stencil leaves the field domain")
    return traction_from_gradient(field_gradient(field, x, h), ctx)


# ---------------------------------------------------------------------------
# Betti identity
# ---------------------------------------------------------------------------


@dataclass
class IdentityReport:
    lhs: complex
    rhs: complex
    abs_residual: float
    rel_residual: float
    quadrature_meta: dict = field(default_factory=dict)


def _make_report(lhs: complex, rhs: complex, meta: dict) -> IdentityReport:
    a = abs(lhs - rhs)
    return IdentityReport(complex(lhs), complex(rhs), float(a), float(a / max(abs(lhs), abs(rhs), 1e-300)), meta)


def _as_field(u0) -> Callable:
    if isinstance(u0, CgoParams):
        return lambda x: cgo_field(u0, x)
    if isinstance(u0, IncidentWave):
        return lambda x: incident_field(u0, x)
    if callable(u0):
        return u0
    raise TypeError("test function must be CgoParams, IncidentWave or a callable")


def boundary_nodes(region: ConvexPolygon, n_per_edge: int, rule: str = "gauss"):
    """Quadrature nodes, weights and outward normals on each edge of ``region``.

    ``rule="trapezoid"`` is the composite trapezoid rule; ``rule="gauss"`` uses
    16-point Gauss-Legendre panels with the same number of nodes per edge.
    """
    pts, wts, nrm = [], [], []
    normals = region.outward_normals()
    for k, (a, b) in enumerate(region.edges()):
        L = float(np.hypot(*(b - a)))
        if rule == "trapezoid":
            t = np.linspace(0.0, 1.0, n_per_edge + 1)
            w = np.full(n_per_edge + 1, L / n_per_edge)
            w[[0, -1]] *= 0.5
        elif rule == "gauss":
            m = max(1, n_per_edge // 16)
            xg, wg = np.polynomial.legendre.leggauss(16)
            t = np.concatenate([(j + 0.5 * (xg + 1)) / m for j in range(m)])
            w = np.tile(0.5 * wg / m, m) * L
        else:
            raise ValueError(f"unknown boundary rule {rule!r}")
        pts.append(a + t[:, None] * (b - a))
        wts.append(w)
        nrm.append(np.repeat(normals[k][None, :], len(t), axis=0))
    return np.vstack(pts), np.concatenate(wts), np.vstack(nrm)


def betti_identity_check(region: ConvexPolygon, u: ScatteringSolution, u_incident: IncidentWave, u0, density: DensityField | None = None, n_per_edge: int = BOUNDARY_NODES_PER_EDGE, fd_step: float | None = None, rule: str = "gauss") -> IdentityReport:
    """Compare ``omega^2 int_S (rho - 1) u.u0`` with its boundary form on ``dS``.

    The volume side uses the solver's cell quadrature; the boundary side uses
    ``boundary_nodes(rule)`` with finite-difference tractions of ``u^i - u``
    and ``u0``.
    """
    sol = u
    ctx = u_incident.context
    params = sol.params
    xmin, xmax, ymin, ymax = sol.grid.bbox
    rb = region.bbox()
    if rb[0] < xmin - 1e-12 or rb[1] > xmax + 1e-12 or rb[2] < ymin - 1e-12 or rb[3] > ymax + 1e-12:
        raise FieldDomainError("region escapes the solver grid")
    f0 = _as_field(u0)
    dens = density if density is not None else sol.scatterer.density
    inS = region.contains(sol.nodes)
    q = dens(sol.nodes[inS]) - 1.0
    vals = cdot_rows(sol.total_on_cells[inS], f0(sol.nodes[inS]))
    lhs = ctx.omega**2 * np.sum(sol.weights[inS] * q * vals)

    h = FD_STEP_FRACTION * ctx.min_wavelength if fd_step is None else fd_step
    x, w, nu = boundary_nodes(region, n_per_edge, rule)
    tctx = traction_context(params, nu)
    diff = lambda y: incident_field(u_incident, y) - forward.total_field(sol, y)  # noqa: E731
    d = diff(x)
    Td = surface_traction(diff, x, tctx, step=h)
    v0 = f0(x)
    T0 = surface_traction(f0, x, tctx, step=h)
    rhs = np.sum(w * (cdot_rows(v0, Td) - cdot_rows(d, T0)))
    meta = {"n_per_edge": n_per_edge, "rule": rule, "fd_step": h, "n_cells": int(inS.sum()), "cell_size": sol.grid.cell_size}
    return _make_report(lhs, rhs, meta)


def cdot_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * b, axis=-1)


# ---------------------------------------------------------------------------
# Corner terms
# ---------------------------------------------------------------------------


@dataclass
class CornerConfig:
    scatterer: MediumScatterer
    wave: IncidentWave
    params: LameParameters
    vertex: int
    h: float
    tau_list: list
    cell_size: float = 1 / 20
    solution: ScatteringSolution | None = None
    theta2: float = 0.5
    n_theta: int = 48
    n_panels: int = 24
    n_gauss: int = 10


@dataclass
class CornerTermBreakdown:
    R1: float
    R2: float
    R3: float
    R4: float
    I1: float
    I2: float
    tau: float
    h: float
    bounds: dict

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ValueError("corner radius h must lie in (0, 1)")


CORNER_COLUMNS = ["tau", "h", "R1", "R2", "R3", "R4", "I1", "I2", "bound_R1", "bound_R2", "bound_R3", "bound_R4", "bound_I1", "bound_I2"]


def corner_terms_csv(rows: list[CornerTermBreakdown]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CORNER_COLUMNS)
    for r in rows:
        w.writerow([repr(float(v)) for v in (r.tau, r.h, r.R1, r.R2, r.R3, r.R4, r.I1, r.I2)] + [repr(float(r.bounds[k])) for k in ("R1", "R2", "R3", "R4", "I1", "I2")])
    return buf.getvalue()


def _graded_radial(h: float, n_panels: int, n_gauss: int):
    """Gauss nodes on ``[0, h]`` in panels ``[h 2^-(k+1), h 2^-k]`` plus a last panel to 0."""
    xg, wg = np.polynomial.legendre.leggauss(n_gauss)
    edges = np.concatenate([[0.0], h * 2.0 ** -np.arange(n_panels, -1, -1)])
    r, w = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        r.append(0.5 * (hi - lo) * (xg + 1) + lo)
        w.append(0.5 * (hi - lo) * wg)
    return np.concatenate(r), np.concatenate(w)


def corner_terms(config: CornerConfig) -> list[CornerTermBreakdown]:
    """Evaluate ``R1..R4``, ``I1``, ``I2`` at a vertex for each tau, with all bound constants set to 1."""
    P = config.scatterer.polygon
    dens = config.scatterer.density
    ctx = config.wave.context
    params = config.params
    h = float(config.h)
    if not 0 < h < 1:
        raise ValueError("corner radius h must lie in (0, 1)")
    guard = float(vertex_to_nonadjacent_edge_distances(P)[config.vertex])
    if h >= guard:
        raise ValueError(f"h = {h} reaches a non-adjacent edge (distance {guard:.4g})")
    sol = config.solution
    if sol is None:
        grid = forward.build_grid(P, config.cell_size)
        sol = forward.solve(config.scatterer, config.wave, grid, params)

    cone = vertex_cone(P, config.vertex)
    x0 = cone.apex
    p, delta0 = direction_and_delta0(cone)
    u_x0 = forward.total_field(sol, x0[None, :])[0]
    choice = choose_p_perp(u_x0, p, ctx.kappa_s)

    taus = []
    for tau in config.tau_list:
        if delta0 * tau * h > 700 or tau <= ctx.kappa_s:
            warnings.warn(f"tau = {tau} dropped (exponent guard or tau <= kappa_s)", stacklevel=2)
            continue
        taus.append(float(tau))

    # polar quadrature on S_h, shared by every tau
    t1, t2 = cone.angle_range
    xt, wt = np.polynomial.legendre.leggauss(config.n_theta)
    th = 0.5 * (t2 - t1) * (xt + 1) + t1
    wth = 0.5 * (t2 - t1) * wt
    r, wr = _graded_radial(h, config.n_panels, config.n_gauss)
    om = np.stack([np.cos(th), np.sin(th)], axis=1)
    pts = x0 + r[None, :, None] * om[:, None, :]  # (theta, r, 2)
    wts = wth[:, None] * (wr * r)[None, :]
    rho = dens(pts)
    rho0 = float(dens(x0[None, :])[0])
    u_pts = forward.total_field(sol, pts.reshape(-1, 2)).reshape(pts.shape)
    u1 = u_pts - u_x0

    # lateral edges of the cone inside B_h, and the arc |x - x0| = h
    e1, e2 = cone.edge_directions()
    n_out1 = -rot90(e1)  # e1 is the clockwise edge: outward normal points clockwise
    n_out2 = rot90(e2)
    lat_pts = np.concatenate([x0 + r[:, None] * e1, x0 + r[:, None] * e2])
    lat_w = np.concatenate([wr, wr])
    lat_n = np.concatenate([np.repeat(n_out1[None], len(r), 0), np.repeat(n_out2[None], len(r), 0)])
    arc_pts = x0 + h * om
    arc_w = h * wth
    step = FD_STEP_FRACTION * ctx.min_wavelength
    us = lambda y: -forward.scattered_field(sol, y)  # noqa: E731  (u^i - u)
    lat_ctx = traction_context(params, lat_n)
    arc_ctx = traction_context(params, om)
    d_lat, d_arc = us(lat_pts), us(arc_pts)
    Td_lat = surface_traction(us, lat_pts, lat_ctx, step=step)
    Td_arc = surface_traction(us, arc_pts, arc_ctx, step=step)
    sup_lat = max(float(np.max(np.linalg.norm(Td_lat, axis=-1))), float(np.max(np.linalg.norm(d_lat, axis=-1))))
    sup_arc = max(float(np.max(np.linalg.norm(Td_arc, axis=-1))), float(np.max(np.linalg.norm(d_arc, axis=-1))))
    umag = float(np.linalg.norm(u_x0))
    theta1 = dens.holder_exponent

    out = []
    for tau in taus:
        cg = make_cgo(x0, p, choice.p_perp, tau, ctx.kappa_s)
        c0 = complex(cg.eta @ u_x0)
        e = np.exp(np.einsum("trk,k->tr", pts - x0, cg.xi))
        f = om @ cg.xi  # xi.w(theta), Re f < 0
        head = np.sum(wts * e)
        # tail int_h^inf r e^{f r} dr = e^{f h} (1/f^2 - h/f)
        tail = np.sum(wth * np.exp(f * h) * (1 / f**2 - h / f))
        R1 = abs(c0 * tail)
        R2 = abs(c0 * head)
        R3 = abs(c0 * np.sum(wts * e * (rho - rho0)))
        R4 = abs(np.sum(wts * e * (rho - 1.0) * (u1 @ cg.eta)))

        def boundary(ptsb, wb, ctxb, db, Tdb):
            v0 = cgo_field(cg, ptsb)
            T0 = surface_traction(lambda y: cgo_field(cg, y), ptsb, ctxb, step=step)
            return abs(np.sum(wb * (cdot_rows(v0, Tdb) - cdot_rows(db, T0))))

        I1 = boundary(lat_pts, lat_w, lat_ctx, d_lat, Td_lat)
        I2 = boundary(arc_pts, arc_w, arc_ctx, d_arc, Td_arc)
        bounds = {
            "R1": umag * tau**-2 * math.exp(-delta0 * tau * h / 2),
            "R2": umag * tau**-2,
            "R3": umag * tau ** (-2 - theta1),
            "R4": tau ** (-2 - config.theta2),
            "I1": h * sup_lat,
            "I2": h * math.exp(-delta0 * tau * h),
        }
        out.append(CornerTermBreakdown(R1, R2, R3, R4, I1, I2, tau, h, bounds))
    logger.debug("corner terms at vertex %d for %d tau values", config.vertex, len(out))
    return out


def sector_check(config: CornerConfig, tau: float) -> complex:
    """Full-sector integral at the configured vertex, for comparing ``R1 + R2`` against the closed form."""
    cone = vertex_cone(config.scatterer.polygon, config.vertex)
    p, _ = direction_and_delta0(cone)
    cg = make_cgo(cone.apex, p, rot90(p), tau, config.wave.context.kappa_s)
    return sector_integral(cone, cg)
