"""Elastic parameters, incident plane waves, density fields and
finite-difference checks of the Navier equation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import ConvexPolygon


class ParameterError(ValueError):
    """Physical parameters violate their invariants."""


class GridDimensionError(ValueError):
    """Grid too small for the finite-difference stencil."""


@dataclass(frozen=True)
class LameParameters:
    lam: float
    mu: float
    dim: int = 2

    def __post_init__(self):
        if self.dim != 2:
            raise ParameterError("only n = 2 is supported")
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not self.dim * self.lam + 2 * self.mu > 0:
            raise ParameterError("strong convexity n*lambda + 2*mu > 0 violated")
        if not self.lam + 2 * self.mu > 0:
            raise ParameterError("lambda + 2*mu must be positive")


@dataclass(frozen=True)
class WaveContext:
    omega: float
    kappa_p: float
    kappa_s: float

    @property
    def wavelength_p(self) -> float:
        return 2 * math.pi / self.kappa_p

    @property
    def wavelength_s(self) -> float:
        return 2 * math.pi / self.kappa_s

    @property
    def min_wavelength(self) -> float:
        return min(self.wavelength_p, self.wavelength_s)


def wavenumbers(params: LameParameters, omega: float) -> WaveContext:
    """Compressional and shear wavenumbers at angular frequency ``omega``."""
    if not omega > 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    return WaveContext(
        omega=float(omega),
        kappa_p=omega * math.sqrt(1.0 / (params.lam + 2 * params.mu)),
        kappa_s=omega * math.sqrt(1.0 / params.mu),
    )


def rot90(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True)
class IncidentWave:
    """``alpha1 d exp(i kp x.d) + alpha2 d_perp exp(i ks x.d)``."""

    alpha1: complex
    alpha2: complex
    d: np.ndarray
    d_perp: np.ndarray
    context: WaveContext

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        dp = np.asarray(self.d_perp, dtype=float)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "d_perp", dp)
        if abs(self.alpha1) + abs(self.alpha2) == 0:
            raise ParameterError("incident amplitudes are both zero")
        if abs(np.hypot(*d) - 1) > 1e-12 or abs(np.hypot(*dp) - 1) > 1e-12:
            raise ParameterError("d and d_perp must be unit vectors")
        if abs(np.dot(d, dp)) > 1e-12:
            raise ParameterError("d_perp must be orthogonal to d")

    def scaled(self, c: complex) -> "IncidentWave":
        return IncidentWave(c * self.alpha1, c * self.alpha2, self.d, self.d_perp, self.context)

    def rotated(self, angle: float) -> "IncidentWave":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return IncidentWave(self.alpha1, self.alpha2, rot @ self.d, rot @ self.d_perp, self.context)


def plane_wave(context: WaveContext, alpha1: complex = 1.0, alpha2: complex = 0.0, angle: float = 0.0) -> IncidentWave:
    """Plane wave travelling at polar ``angle``; ``d_perp`` is ``d`` turned by +90 degrees."""
    d = np.array([math.cos(angle), math.sin(angle)])
    return IncidentWave(complex(alpha1), complex(alpha2), d, rot90(d), context)


def incident_field(wave: IncidentWave, x) -> np.ndarray:
    """Evaluate the incident wave at points ``x`` of shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    phase = x @ wave.d
    ctx = wave.context
    up = wave.alpha1 * np.exp(1j * ctx.kappa_p * phase)
    us = wave.alpha2 * np.exp(1j * ctx.kappa_s * phase)
    return up[..., None] * wave.d + us[..., None] * wave.d_perp


def incident_parts(wave: IncidentWave, x) -> tuple[np.ndarray, np.ndarray]:
    """Analytic longitudinal and transversal summands of the incident wave."""
    x = np.asarray(x, dtype=float)
    phase = x @ wave.d
    ctx = wave.context
    up = (wave.alpha1 * np.exp(1j * ctx.kappa_p * phase))[..., None] * wave.d
    us = (wave.alpha2 * np.exp(1j * ctx.kappa_s * phase))[..., None] * wave.d_perp
    return up, us


# ---------------------------------------------------------------------------
# Density
# ---------------------------------------------------------------------------


@dataclass
class DensityField:
    """Density ``rho`` equal to 1 outside ``support``.

    ``profile`` gives rho on the closed support; ``holder_exponent`` and
    ``holder_norm_bound`` are the claimed Hoelder data, ``contrast_floor`` the
    required vertex contrast.
    """

    support: ConvexPolygon
    profile: Callable[[np.ndarray], np.ndarray]
    holder_exponent: float = 1.0
    holder_norm_bound: float = 0.0
    contrast_floor: float = 0.0
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.holder_exponent <= 1:
            raise ParameterError("Hoelder exponent must lie in (0, 1]")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = self.support.contains(x)
        vals = np.asarray(self.profile(x), dtype=float) * np.ones(x.shape[:-1])
        return np.where(inside, vals, 1.0)

    value_at = __call__

    def contrast(self, x) -> np.ndarray:
        return self(x) - 1.0

    def sample_inside(self, n: int, rng: np.random.Generator) -> np.ndarray:
        xmin, xmax, ymin, ymax = self.support.bbox()
        out = np.empty((0, 2))
        while len(out) < n:
            pts = np.stack([rng.uniform(xmin, xmax, 4 * n), rng.uniform(ymin, ymax, 4 * n)], axis=1)
            out = np.vstack([out, pts[self.support.contains(pts)]])
        return out[:n]

    def holder_check(self, n_pairs: int = 2000, seed: int = 0) -> float:
        """Largest sampled quotient ``|rho(x)-rho(y)| / |x-y|^theta`` in the support."""
        rng = np.random.default_rng(seed)
        x = self.sample_inside(n_pairs, rng)
        y = self.sample_inside(n_pairs, rng)
        # include vertices, where corner-anchored profiles are least regular
        x = np.vstack([x, self.support.vertices])
        y = np.vstack([y, self.support.vertices + 1e-3 * (self.support.centroid - self.support.vertices)])
        dist = np.hypot(*(x - y).T)
        ok = dist > 0
        q = np.abs(self.profile(x[ok]) * np.ones(ok.sum()) - self.profile(y[ok]) * np.ones(ok.sum()))
        return float(np.max(q / dist[ok] ** self.holder_exponent)) if np.any(ok) else 0.0

    def with_support(self, support: ConvexPolygon) -> "DensityField":
        return DensityField(support, self.profile, self.holder_exponent, self.holder_norm_bound, self.contrast_floor, dict(self.spec))


def constant_density(support: ConvexPolygon, contrast: float) -> DensityField:
    """``rho = 1 + contrast`` on the support."""
    c = float(contrast)
    return DensityField(
        support,
        lambda x: np.full(np.shape(x)[:-1], 1.0 + c),
        holder_exponent=1.0,
        holder_norm_bound=0.0,
        contrast_floor=abs(c),
        spec={"kind": "constant", "contrast": c},
    )


def holder_density(support: ConvexPolygon, contrast: float, apex, coeff: float, theta: float) -> DensityField:
    """``rho = 1 + contrast + coeff |x - apex|^theta``, which is theta-Hoelder with norm |coeff|."""
    a = np.asarray(apex, dtype=float)
    c, k, th = float(contrast), float(coeff), float(theta)

    def profile(x):
        x = np.asarray(x, dtype=float)
        return 1.0 + c + k * np.hypot(x[..., 0] - a[0], x[..., 1] - a[1]) ** th

    rv = np.abs(profile(support.vertices) - 1.0)
    return DensityField(
        support,
        profile,
        holder_exponent=th,
        holder_norm_bound=abs(k),
        contrast_floor=float(rv.min()),
        spec={"kind": "holder", "contrast": c, "apex": a.tolist(), "coeff": k, "theta": th},
    )


def unit_density(support: ConvexPolygon) -> DensityField:
    """The zero-contrast medium ``rho == 1``."""
    return constant_density(support, 0.0)


def density_from_spec(support: ConvexPolygon, spec: dict) -> DensityField:
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return constant_density(support, spec["contrast"])
    if kind == "holder":
        apex = spec.get("apex")
        if apex is None:
            apex = support.vertices[int(spec.get("apex_vertex", 0))]
        return holder_density(support, spec["contrast"], apex, spec.get("coeff", 0.0), spec.get("theta", 0.5))
    raise ParameterError(f"unknown density kind {kind!r}")


# ---------------------------------------------------------------------------
# Grid-sampled fields and finite differences
# ---------------------------------------------------------------------------


@dataclass
class GridField:
    """Complex 2-vector field on a uniform grid; ``values[iy, ix, component]``."""

    origin: np.ndarray
    h: float
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]

    def points(self) -> np.ndarray:
        ny, nx = self.shape
        xs = self.origin[0] + self.h * np.arange(nx)
        ys = self.origin[1] + self.h * np.arange(ny)
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def interior(self) -> "GridField":
        return GridField(self.origin + self.h, self.h, self.values[1:-1, 1:-1])


def sample_grid(func, center, half_width: float, h: float) -> GridField:
    """Sample ``func`` on a square grid of half-width ``half_width`` with spacing ``h``."""
    n = int(round(2 * half_width / h)) + 1
    c = np.asarray(center, dtype=float)
    origin = c - 0.5 * h * (n - 1)
    g = GridField(origin, h, np.zeros((n, n, 2), dtype=complex))
    g.values = np.asarray(func(g.points()), dtype=complex)
    return g


def _second_derivatives(U: np.ndarray, h: float):
    if U.shape[0] < 3 or U.shape[1] < 3:
        raise GridDimensionError("need at least a 3x3 grid for second derivatives")
    c = U[1:-1, 1:-1]
    uxx = (U[1:-1, 2:] - 2 * c + U[1:-1, :-2]) / h**2
    uyy = (U[2:, 1:-1] - 2 * c + U[:-2, 1:-1]) / h**2
    uxy = (U[2:, 2:] - U[2:, :-2] - U[:-2, 2:] + U[:-2, :-2]) / (4 * h**2)
    return uxx, uyy, uxy


def _grad_div(U: np.ndarray, h: float) -> np.ndarray:
    uxx, uyy, uxy = _second_derivatives(U, h)
    return np.stack([uxx[..., 0] + uxy[..., 1], uxy[..., 0] + uyy[..., 1]], axis=-1)


def lame_operator_terms(field: GridField, params: LameParameters):
    """Second-order FD ``(mu Laplace u, (lambda+mu) grad div u)`` on interior nodes."""
    uxx, uyy, _ = _second_derivatives(field.values, field.h)
    lap = uxx + uyy
    gd = _grad_div(field.values, field.h)
    return params.mu * lap, (params.lam + params.mu) * gd


def navier_residual(field: GridField, density, context: WaveContext, params: LameParameters, relative: bool = False) -> float:
    """Max over interior nodes of ``|Lame(u) + rho omega^2 u|``.

    With ``relative=True`` the residual is divided by the largest sum of the
    magnitudes of the individual second partials and the mass term, i.e. the
    FD error relative to the terms actually differenced (these cancel heavily
    for complex-exponential fields).
    """
    lap_term, gd_term = lame_operator_terms(field, params)
    inner = field.interior()
    rho = np.ones(inner.shape) if density is None else density(inner.points())
    mass = rho[..., None] * context.omega**2 * inner.values
    res = np.linalg.norm(lap_term + gd_term + mass, axis=-1)
    worst = float(res.max())
    if not relative:
        return worst
    uxx, uyy, uxy = (np.linalg.norm(d, axis=-1) for d in _second_derivatives(field.values, field.h))
    scale = (
        params.mu * (uxx + uyy)
        + (params.lam + params.mu) * (uxx + uyy + 2 * uxy)
        + np.linalg.norm(mass, axis=-1)
    ).max()
    return worst / scale if scale > 0 else worst


def navier_residual_at(func, points, density, context: WaveContext, params: LameParameters, h: float) -> np.ndarray:
    """Relative FD Navier residual at each point using a local 3x3 stencil."""
    out = []
    for x in np.atleast_2d(points):
        g = sample_grid(func, x, h, h)
        out.append(navier_residual(g, density, context, params, relative=True))
    return np.array(out)


def helmholtz_split(field: GridField, context: WaveContext) -> tuple[GridField, GridField]:
    """Split a homogeneous Navier solution into curl-free and divergence-free parts.

    ``u_p = -grad div u / kappa_p^2`` and ``u_s = u - u_p``, both returned on the
    interior nodes.
    """
    gd = _grad_div(field.values, field.h)
    up = -gd / context.kappa_p**2
    inner = field.interior()
    return GridField(inner.origin, field.h, up), GridField(inner.origin, field.h, inner.values - up)


def fd_curl(field: GridField) -> np.ndarray:
    """Scalar curl ``d1 u2 - d2 u1`` by centred differences (interior nodes)."""
    U, h = field.values, field.h
    d1u2 = (U[1:-1, 2:, 1] - U[1:-1, :-2, 1]) / (2 * h)
    d2u1 = (U[2:, 1:-1, 0] - U[:-2, 1:-1, 0]) / (2 * h)
    return d1u2 - d2u1


def fd_divergence(field: GridField) -> np.ndarray:
    U, h = field.values, field.h
    return (U[1:-1, 2:, 0] - U[1:-1, :-2, 0]) / (2 * h) + (U[2:, 1:-1, 1] - U[:-2, 1:-1, 1]) / (2 * h)


def vertex_field_check(values: np.ndarray, threshold: float = 1e-8) -> list[int]:
    """Indices of vertices where ``|u|`` is at or below ``threshold``."""
    mags = np.linalg.norm(np.asarray(values), axis=-1)
    return [int(i) for i in np.nonzero(mags <= threshold)[0]]
