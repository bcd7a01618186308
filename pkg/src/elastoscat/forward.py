"""Forward elastic scattering by a density inclusion.

The total field solves the Lippmann-Schwinger equation

    u(x) = u^i(x) + omega^2 int_Omega Gamma(x, y) (rho(y) - 1) u(y) dy

with ``Gamma`` the radiating fundamental tensor of ``Lame + omega^2``.  It is
discretised by area-weighted midpoint collocation on square cells clipped to
the polygon; the weakly singular self-cell integral is taken over a disk of
equal area, in closed form.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .geometry import ConvexPolygon, polygon_from_list
from .material import (
    DensityField,
    IncidentWave,
    LameParameters,
    WaveContext,
    density_from_spec,
    incident_field,
)
from .specfun import hankel01

logger = logging.getLogger(__name__)

MAX_DENSE_UNKNOWNS = 8000
DEFAULT_DIRECTIONS = 64
_ROW_BLOCK = 192


class SingularityError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message if condition is None else f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class FieldDomainError(ValueError):
    pass


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class MediumScatterer:
    polygon: ConvexPolygon
    density: DensityField

    @property
    def is_trivial(self) -> bool:
        return self.density.spec.get("kind") == "constant" and self.density.spec.get("contrast") == 0.0


# ---------------------------------------------------------------------------
# Fundamental tensor
# ---------------------------------------------------------------------------


def _kernel_coeffs(r: np.ndarray, params: LameParameters, ctx: WaveContext):
    """Coefficients ``(A, B)`` with ``Gamma = A I + B rr^T`` (``r`` kept > 0)."""
    ks, kp, w2 = ctx.kappa_s, ctx.kappa_p, ctx.omega**2
    h0s, h1s = hankel01(ks * r)
    h0p, h1p = hankel01(kp * r)
    d1 = (ks * h1s - kp * h1p) / r
    a = 0.25j * h0s / params.mu - 0.25j * d1 / w2
    b = 0.25j * (-(ks**2) * h0s + kp**2 * h0p + 2.0 * d1) / w2
    return a, b


def _p_part_coeffs(r: np.ndarray, ctx: WaveContext):
    """Coefficients of the longitudinal part ``Gamma_p = -grad grad Phi_p / omega^2``."""
    kp, w2 = ctx.kappa_p, ctx.omega**2
    h0p, h1p = hankel01(kp * r)
    # Hess H0(kr) = -k^2 H0 rr^T + (k H1 / r)(2 rr^T - I)
    a = -0.25j * (-kp * h1p / r) / w2
    b = -0.25j * (-(kp**2) * h0p + 2.0 * kp * h1p / r) / w2
    return a, b


def _assemble_tensor(diff: np.ndarray, a: np.ndarray, b: np.ndarray, r: np.ndarray) -> np.ndarray:
    rh = diff / r[..., None]
    g = b[..., None, None] * rh[..., :, None] * rh[..., None, :]
    g[..., 0, 0] += a
    g[..., 1, 1] += a
    return g


def green_tensor(x, y, params: LameParameters, context: WaveContext) -> np.ndarray:
    """Radiating fundamental tensor ``Gamma(x, y)``, shape (..., 2, 2).

    ``(Lame + omega^2) Gamma(., y) = -delta_y I``.
    """
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    shape = diff.shape[:-1]
    diff = diff.reshape(-1, 2)
    r = np.hypot(diff[:, 0], diff[:, 1])
    if np.any(r == 0):
        raise SingularityError("Gamma(x, y) is singular at x = y")
    a, b = _kernel_coeffs(r, params, context)
    return _assemble_tensor(diff, a, b, r).reshape(shape + (2, 2))


def green_tensor_p(x, y, params: LameParameters, context: WaveContext) -> np.ndarray:
    """Curl-free (longitudinal) part of ``Gamma``; ``Gamma - Gamma_p`` is divergence-free."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    shape = diff.shape[:-1]
    diff = diff.reshape(-1, 2)
    r = np.hypot(diff[:, 0], diff[:, 1])
    if np.any(r == 0):
        raise SingularityError("Gamma_p(x, y) is singular at x = y")
    a, b = _p_part_coeffs(r, context)
    return _assemble_tensor(diff, a, b, r).reshape(shape + (2, 2))


def disk_integral(radius, params: LameParameters, context: WaveContext) -> np.ndarray:
    """Scalar ``c`` with ``int_{|y-x|<radius} Gamma(x, y) dy = c I``.

    Uses ``int_0^a r H0(kr) dr = a H1(ka)/k + 2i/(pi k^2)`` for the shear
    potential and the divergence theorem for the Hessian term, whose logarithmic
    singularities cancel.
    """
    a = np.asarray(radius, dtype=float)
    ks, kp, w2 = context.kappa_s, context.kappa_p, context.omega**2
    _, h1s = hankel01(ks * a)
    _, h1p = hankel01(kp * a)

    phi_s = 0.5j * math.pi * a * h1s / ks - 1.0 / ks**2
    dg = 0.25j * (-ks * h1s + kp * h1p) / w2
    return phi_s / params.mu + math.pi * a * dg


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


@dataclass
class SolverGrid:
    """Square cells tiling ``bbox``; cells meeting the polygon carry unknowns.

    Each active cell is represented by the centroid of its polygon-clipped part
    (``nodes``) with weight equal to the clipped area (``weights``).
    """

    bbox: tuple[float, float, float, float]
    cell_size: float
    centers: np.ndarray
    inside_flag: np.ndarray
    fractions: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_cells(self) -> int:
        return len(self.centers)

    @property
    def active(self) -> np.ndarray:
        return self.weights > 0

    @property
    def n_unknowns(self) -> int:
        return 2 * int(self.active.sum())

    @property
    def shape(self) -> tuple[int, int]:
        xmin, xmax, ymin, ymax = self.bbox
        return int(round((ymax - ymin) / self.cell_size)), int(round((xmax - xmin) / self.cell_size))


def build_grid(polygon: ConvexPolygon, cell_size: float, bbox=None, context: WaveContext | None = None, min_fraction: float = 1e-9) -> SolverGrid:
    """Tile ``bbox`` (default: the polygon bbox padded to whole cells) with square cells."""
    h = float(cell_size)
    if bbox is None:
        xmin, xmax, ymin, ymax = polygon.bbox()
        nx = max(1, math.ceil((xmax - xmin) / h - 1e-9))
        ny = max(1, math.ceil((ymax - ymin) / h - 1e-9))
        cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
        bbox = (cx - 0.5 * nx * h, cx + 0.5 * nx * h, cy - 0.5 * ny * h, cy + 0.5 * ny * h)
    xmin, xmax, ymin, ymax = (float(v) for v in bbox)
    nx = int(round((xmax - xmin) / h))
    ny = int(round((ymax - ymin) / h))
    if abs(nx * h - (xmax - xmin)) > 1e-9 * max(1.0, xmax - xmin) or abs(ny * h - (ymax - ymin)) > 1e-9 * max(1.0, ymax - ymin):
        raise ValueError("bbox must be a whole number of cells")
    pxmin, pxmax, pymin, pymax = polygon.bbox()
    if pxmin < xmin - 1e-12 or pxmax > xmax + 1e-12 or pymin < ymin - 1e-12 or pymax > ymax + 1e-12:
        raise ValueError("bbox does not contain the polygon")
    if context is not None and h > context.min_wavelength / 10:
        warnings.warn(f"cell size {h:.4g} exceeds a tenth of the shortest wavelength {context.min_wavelength:.4g}", stacklevel=2)

    xs = xmin + h * (np.arange(nx) + 0.5)
    ys = ymin + h * (np.arange(ny) + 0.5)
    X, Y = np.meshgrid(xs, ys)
    centers = np.stack([X.ravel(), Y.ravel()], axis=1)
    inside = polygon.contains(centers)
    fractions = np.zeros(len(centers))
    nodes = centers.copy()
    weights = np.zeros(len(centers))
    # only cells within a cell diagonal of the polygon can overlap it
    near = polygon.distance(centers) <= h * 0.7072
    for k in np.nonzero(near)[0]:
        c = centers[k]
        area, cen = polygon.clip_box(c[0] - 0.5 * h, c[0] + 0.5 * h, c[1] - 0.5 * h, c[1] + 0.5 * h)
        frac = area / h**2
        if frac > min_fraction:
            fractions[k] = min(frac, 1.0)
            nodes[k] = cen
            weights[k] = area
    return SolverGrid((xmin, xmax, ymin, ymax), h, centers, inside, fractions, nodes, weights)


# ---------------------------------------------------------------------------
# Collocation operator
# ---------------------------------------------------------------------------


def _radial_potentials(r: np.ndarray, a: np.ndarray, kappa: float):
    """``V, V', V''`` of the Helmholtz potential ``int_{|y|<a} Phi_kappa(x - y) dy`` at ``|x| = r``.

    Outside the disk the potential is ``beta H0(kappa r)`` with
    ``beta = i pi a J1(kappa a) / (2 kappa)`` (addition theorem); inside it is
    ``alpha J0(kappa r) - 1/kappa^2`` with ``alpha = i pi a H1(kappa a) / (2 kappa)``.
    """
    x = kappa * r
    h0, h1 = hankel01(x)
    _, h1a = hankel01(kappa * a)
    inside = r < a
    alpha = 0.5j * math.pi * a * h1a / kappa
    beta = 0.5j * math.pi * a * h1a.real / kappa
    f0 = np.where(inside, h0.real, h0)
    f1 = np.where(inside, h1.real, h1)
    c = np.where(inside, alpha, beta)
    v = c * f0 - np.where(inside, 1.0 / kappa**2, 0.0)
    v1 = -c * kappa * f1
    v2 = -c * kappa**2 * (f0 - f1 / x)
    return v, v1, v2


def _disk_coeffs(r: np.ndarray, a: np.ndarray, params: LameParameters, ctx: WaveContext):
    """``(A, B)`` with ``int_{|y - y_j| < a} Gamma(x, y) dy = A I + B rr^T``, ``r = |x - y_j|``."""
    vs, vs1, vs2 = _radial_potentials(r, a, ctx.kappa_s)
    _, vp1, vp2 = _radial_potentials(r, a, ctx.kappa_p)
    w2 = ctx.omega**2
    g1_r = (vs1 - vp1) / (w2 * r)
    g2 = (vs2 - vp2) / w2
    return vs / params.mu + g1_r, g2 - g1_r


def _disk_p_coeffs(r: np.ndarray, a: np.ndarray, ctx: WaveContext):
    """Longitudinal part ``-grad grad V_p / omega^2`` of the disk potential."""
    _, vp1, vp2 = _radial_potentials(r, a, ctx.kappa_p)
    w2 = ctx.omega**2
    return -vp1 / (w2 * r), -(vp2 - vp1 / r) / w2


def _pair_geometry(targets: np.ndarray, nodes: np.ndarray, radii: np.ndarray):
    diff = targets[:, None, :] - nodes[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    # the disk potentials are smooth at the centre; keep r > 0 for the formulas
    r = np.maximum(r, 1e-9 * radii[None, :])
    return diff, r


def _kernel_block(targets: np.ndarray, nodes: np.ndarray, radii: np.ndarray, params, ctx, part: str = "full") -> np.ndarray:
    """Cell kernel ``K[t, :, j, :] = int_{disk_j} Gamma(x_t, y) dy`` for equal-area disks."""
    diff, r = _pair_geometry(targets, nodes, radii)
    rr = radii[None, :]
    if part == "full":
        a, b = _disk_coeffs(r, rr, params, ctx)
    else:
        a, b = _disk_p_coeffs(r, rr, ctx)
    g = _assemble_tensor(diff, a, b, r)
    return g.transpose(0, 2, 1, 3)  # (t, comp_out, j, comp_in)


@dataclass(frozen=True)
class _Discretisation:
    nodes: np.ndarray
    weights: np.ndarray
    contrast: np.ndarray
    radii: np.ndarray


def _discretise(scatterer: MediumScatterer, grid: SolverGrid, params, ctx) -> _Discretisation:
    act = grid.active
    nodes = grid.nodes[act]
    weights = grid.weights[act]
    contrast = scatterer.density(nodes) - 1.0
    radii = np.sqrt(weights / math.pi)
    return _Discretisation(nodes, weights, contrast, radii)


@dataclass
class ScatteringSolution:
    wave: IncidentWave
    scatterer: MediumScatterer
    params: LameParameters
    grid: SolverGrid
    nodes: np.ndarray
    weights: np.ndarray
    contrast: np.ndarray
    radii: np.ndarray
    total_on_cells: np.ndarray  # (N, 2) complex
    residual_norm: float
    meta: dict = field(default_factory=dict)

    @property
    def context(self) -> WaveContext:
        return self.wave.context

    @property
    def sources(self) -> np.ndarray:
        """``omega^2 (rho - 1) u`` per node, without the cell weight."""
        return self.context.omega**2 * self.contrast[:, None] * self.total_on_cells

    @property
    def scattered_on_cells(self) -> np.ndarray:
        return self.total_on_cells - incident_field(self.wave, self.nodes)


def assemble_system(scatterer: MediumScatterer, grid: SolverGrid, params: LameParameters, ctx: WaveContext):
    """Dense collocation matrix ``I - omega^2 K diag(rho - 1)`` and its discretisation data."""
    disc = _discretise(scatterer, grid, params, ctx)
    n = len(disc.nodes)
    A = np.empty((2 * n, 2 * n), dtype=complex)
    scale = -(ctx.omega**2) * np.repeat(disc.contrast, 2)
    for i0 in range(0, n, _ROW_BLOCK):
        i1 = min(n, i0 + _ROW_BLOCK)
        blk = _kernel_block(disc.nodes[i0:i1], disc.nodes, disc.radii, params, ctx)
        A[2 * i0 : 2 * i1] = blk.reshape(2 * (i1 - i0), 2 * n) * scale[None, :]
    A[np.diag_indices(2 * n)] += 1.0
    return A, disc


def solve(scatterer: MediumScatterer, wave: IncidentWave, grid: SolverGrid, params: LameParameters) -> ScatteringSolution:
    """Solve the discretised Lippmann-Schwinger equation by dense LU plus one refinement step."""
    ctx = wave.context
    disc = _discretise(scatterer, grid, params, ctx)
    n = len(disc.nodes)
    rhs = incident_field(wave, disc.nodes)
    if 2 * n > MAX_DENSE_UNKNOWNS:
        raise SolverError(f"{2 * n} unknowns exceed the dense limit {MAX_DENSE_UNKNOWNS}")
    if n == 0 or not np.any(disc.contrast):
        return ScatteringSolution(wave, scatterer, params, grid, disc.nodes, disc.weights, disc.contrast, disc.radii, rhs.copy(), 0.0, {"n_unknowns": 2 * n})

    A, _ = assemble_system(scatterer, grid, params, ctx)
    b = rhs.reshape(-1)
    try:
        lu = scipy.linalg.lu_factor(A, check_finite=True)
        x = scipy.linalg.lu_solve(lu, b)
        r = b - A @ x
        x = x + scipy.linalg.lu_solve(lu, r)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"linear solve failed: {exc}", float(np.linalg.cond(A))) from exc
    res = float(np.linalg.norm(b - A @ x) / np.linalg.norm(b))
    if not np.isfinite(res) or res > 1e-8:
        raise SolverError(f"linear solve residual {res:.3e} above 1e-8", float(np.linalg.cond(A)))
    logger.debug("solved %d unknowns, residual %.2e", 2 * n, res)
    return ScatteringSolution(
        wave, scatterer, params, grid, disc.nodes, disc.weights, disc.contrast, disc.radii,
        x.reshape(n, 2), res, {"n_unknowns": 2 * n},
    )


def born_scattered_on_cells(scatterer: MediumScatterer, wave: IncidentWave, grid: SolverGrid, params: LameParameters) -> np.ndarray:
    """First Born approximation of ``u^s`` at the nodes, by the same quadrature."""
    ctx = wave.context
    disc = _discretise(scatterer, grid, params, ctx)
    ui = incident_field(wave, disc.nodes)
    src = (ctx.omega**2 * disc.contrast)[:, None] * ui
    return _apply_kernel(disc.nodes, disc, src, params, ctx)


def _apply_kernel(targets: np.ndarray, disc, src: np.ndarray, params, ctx, part: str = "full") -> np.ndarray:
    """``sum_j K(x_t, y_j) src_j`` in row blocks."""
    out = np.empty((len(targets), 2), dtype=complex)
    flat = src.reshape(-1)
    for i0 in range(0, len(targets), _ROW_BLOCK):
        i1 = min(len(targets), i0 + _ROW_BLOCK)
        blk = _kernel_block(targets[i0:i1], disc.nodes, disc.radii, params, ctx, part)
        out[i0:i1] = (blk.reshape(2 * (i1 - i0), -1) @ flat).reshape(i1 - i0, 2)
    return out


# ---------------------------------------------------------------------------
# Field evaluation
# ---------------------------------------------------------------------------


def _evaluate(sol: ScatteringSolution, x: np.ndarray, part: str = "full") -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if len(sol.nodes) == 0 or not np.any(sol.contrast):
        return np.zeros(pts.shape, dtype=complex)
    disc = _Discretisation(sol.nodes, sol.weights, sol.contrast, sol.radii)
    flat = pts.reshape(-1, 2)
    return _apply_kernel(flat, disc, sol.sources, sol.params, sol.context, part).reshape(pts.shape)


def scattered_near_field(sol: ScatteringSolution, x) -> np.ndarray:
    """Scattered field ``u^s`` at points outside the scatterer."""
    pts = np.asarray(x, dtype=float)
    if np.any(sol.scatterer.polygon.distance(pts) == 0):
        raise FieldDomainError("scattered_near_field needs points outside the support; use total_field")
    return _evaluate(sol, pts)


def scattered_field(sol: ScatteringSolution, x) -> np.ndarray:
    """``u^s`` anywhere; continuously differentiable in ``x``."""
    return _evaluate(sol, np.asarray(x, dtype=float))


def total_field(sol: ScatteringSolution, x) -> np.ndarray:
    """Total field via the Lippmann-Schwinger representation (exact at the nodes)."""
    pts = np.asarray(x, dtype=float)
    return incident_field(sol.wave, pts) + _evaluate(sol, pts)


def scattered_near_field_parts(sol: ScatteringSolution, x) -> tuple[np.ndarray, np.ndarray]:
    """Longitudinal and transversal parts ``(u^s_p, u^s_s)`` at points outside the support."""
    total = scattered_near_field(sol, x)
    up = _evaluate(sol, np.asarray(x, dtype=float), part="p")
    return up, total - up


# ---------------------------------------------------------------------------
# Far field
# ---------------------------------------------------------------------------


@dataclass
class FarFieldPattern:
    directions: np.ndarray  # (M, 2) unit vectors
    U_p: np.ndarray  # (M, 2) complex
    U_s: np.ndarray

    @property
    def angles(self) -> np.ndarray:
        return np.arctan2(self.directions[:, 1], self.directions[:, 0])

    @property
    def M(self) -> int:
        return len(self.directions)

    def __sub__(self, other: "FarFieldPattern") -> "FarFieldPattern":
        if not np.allclose(self.directions, other.directions):
            raise SamplingError("patterns sampled on different directions")
        return FarFieldPattern(self.directions, self.U_p - other.U_p, self.U_s - other.U_s)

    def scaled(self, c: complex) -> "FarFieldPattern":
        return FarFieldPattern(self.directions, c * self.U_p, c * self.U_s)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["angle", "Up1_re", "Up1_im", "Up2_re", "Up2_im", "Us1_re", "Us1_im", "Us2_re", "Us2_im"])
        for t, p, s in zip(self.angles, self.U_p, self.U_s):
            w.writerow([repr(float(t))] + [repr(float(v)) for c in (*p, *s) for v in (c.real, c.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FarFieldPattern":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        a = np.array(rows, dtype=float)
        t = a[:, 0]
        up = np.stack([a[:, 1] + 1j * a[:, 2], a[:, 3] + 1j * a[:, 4]], axis=1)
        us = np.stack([a[:, 5] + 1j * a[:, 6], a[:, 7] + 1j * a[:, 8]], axis=1)
        return cls(np.stack([np.cos(t), np.sin(t)], axis=1), up, us)


def uniform_directions(M: int) -> np.ndarray:
    t = 2 * math.pi * np.arange(M) / M
    return np.stack([np.cos(t), np.sin(t)], axis=1)


def far_field_constants(params: LameParameters, ctx: WaveContext) -> tuple[complex, complex]:
    """Prefactors of the longitudinal and transversal far-field kernels.

    With them ``|x|^{1/2} e^{-i k_a |x|} u^s_a(|x| xhat) -> U_a(xhat)``.
    """
    ph = np.exp(0.25j * math.pi)
    cp = ph / (4 * (params.lam + 2 * params.mu)) * math.sqrt(2 / (math.pi * ctx.kappa_p))
    cs = ph / (4 * params.mu) * math.sqrt(2 / (math.pi * ctx.kappa_s))
    return complex(cp), complex(cs)


def _disk_mass(sol: ScatteringSolution, kappa: float) -> np.ndarray:
    # far-field weight of a uniform disk: area * 2 J1(ka) / (ka)
    x = kappa * sol.radii
    j1 = hankel01(np.maximum(x, 1e-300))[1].real
    return sol.weights * np.where(x > 0, 2 * j1 / np.where(x > 0, x, 1.0), 1.0)


def far_field(sol: ScatteringSolution, M: int = DEFAULT_DIRECTIONS, directions=None) -> FarFieldPattern:
    """Longitudinal/transversal far-field patterns on ``M`` uniform directions."""
    if directions is None:
        if M < 8:
            raise SamplingError("need at least 8 directions")
        directions = uniform_directions(M)
    xh = np.asarray(directions, dtype=float)
    ctx = sol.context
    if len(sol.nodes) == 0 or not np.any(sol.contrast):
        z = np.zeros((len(xh), 2), dtype=complex)
        return FarFieldPattern(xh, z, z.copy())
    cp, cs = far_field_constants(sol.params, ctx)
    phase = xh @ sol.nodes.T  # (M, N)
    vp = np.exp(-1j * ctx.kappa_p * phase) @ (sol.sources * _disk_mass(sol, ctx.kappa_p)[:, None])
    vs = np.exp(-1j * ctx.kappa_s * phase) @ (sol.sources * _disk_mass(sol, ctx.kappa_s)[:, None])
    radial_p = np.sum(xh * vp, axis=1)
    U_p = cp * radial_p[:, None] * xh
    U_s = cs * (vs - np.sum(xh * vs, axis=1)[:, None] * xh)
    return FarFieldPattern(xh, U_p, U_s)


def far_field_norm(U: FarFieldPattern) -> float:
    """Trapezoid-rule ``(||U_p||^2 + ||U_s||^2)^{1/2}`` on the unit circle."""
    integrand = np.sum(np.abs(U.U_p) ** 2, axis=1) + np.sum(np.abs(U.U_s) ** 2, axis=1)
    return float(math.sqrt(2 * math.pi / U.M * integrand.sum()))


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------


def _c2(a: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def solution_snapshot(sol: ScatteringSolution) -> dict:
    """JSON-serialisable record of a solved configuration."""
    w = sol.wave
    return {
        "params": {"lam": sol.params.lam, "mu": sol.params.mu},
        "wave": {
            "omega": w.context.omega,
            "alpha1": [w.alpha1.real, w.alpha1.imag],
            "alpha2": [w.alpha2.real, w.alpha2.imag],
            "d": w.d.tolist(),
            "d_perp": w.d_perp.tolist(),
        },
        "polygon": sol.scatterer.polygon.vertices.tolist(),
        "density": sol.scatterer.density.spec,
        "grid": {"bbox": list(sol.grid.bbox), "cell_size": sol.grid.cell_size},
        "nodes": sol.nodes.tolist(),
        "weights": sol.weights.tolist(),
        "total_on_cells": _c2(sol.total_on_cells),
        "residual_norm": sol.residual_norm,
    }


def solution_from_snapshot(snap: dict) -> ScatteringSolution:
    from .material import wavenumbers

    params = LameParameters(snap["params"]["lam"], snap["params"]["mu"])
    ctx = wavenumbers(params, snap["wave"]["omega"])
    wv = snap["wave"]
    wave = IncidentWave(complex(*wv["alpha1"]), complex(*wv["alpha2"]), np.array(wv["d"]), np.array(wv["d_perp"]), ctx)
    poly = polygon_from_list(snap["polygon"])
    dens = density_from_spec(poly, snap["density"])
    grid = build_grid(poly, snap["grid"]["cell_size"], tuple(snap["grid"]["bbox"]))
    scat = MediumScatterer(poly, dens)
    disc = _discretise(scat, grid, params, ctx)
    tot = np.array([[complex(*v) for v in row] for row in snap["total_on_cells"]]).reshape(-1, 2)
    return ScatteringSolution(wave, scat, params, grid, disc.nodes, disc.weights, disc.contrast, disc.radii, tot, snap["residual_norm"])


def dumps_snapshot(sol: ScatteringSolution) -> str:
    return json.dumps(solution_snapshot(sol), sort_keys=True)
