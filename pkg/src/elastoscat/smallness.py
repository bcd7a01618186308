"""Propagation-of-smallness experiments.

Three-spheres inequalities for Helmholtz solutions, chains of balls along a
curve, and the decay of near-field differences in terms of far-field
differences.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special, stats

from . import forward
from .material import ParameterError

logger = logging.getLogger(__name__)

MAX_ORDER = 20
THREE_SPHERES_C = 0.5
NOISE_FLOOR = 1e-9


# ---------------------------------------------------------------------------
# Synthetic Helmholtz fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HelmholtzField:
    """``u(x) = sum_m c_m J_|m|(kappa |x - c|) exp(i m theta)``."""

    kappa: float
    orders: np.ndarray
    coeffs: np.ndarray
    center: np.ndarray

    def __call__(self, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.center
        r = np.hypot(d[..., 0], d[..., 1])
        th = np.arctan2(d[..., 1], d[..., 0])
        out = np.zeros(r.shape, dtype=complex)
        for m, c in zip(self.orders, self.coeffs):
            out += c * special.jv(abs(m), self.kappa * r) * np.exp(1j * m * th)
        return out


def synth_helmholtz(kappa: float, coeffs: Sequence[complex], center=(0.0, 0.0), orders: Sequence[int] | None = None) -> HelmholtzField:
    """Finite Fourier-Bessel sum.

    Without ``orders`` a list of odd length ``2M + 1`` maps to ``m = -M..M``
    (so a single coefficient is the ``m = 0`` mode); even length maps to
    ``m = 0..len-1``.
    """
    c = np.asarray(coeffs, dtype=complex)
    if orders is None:
        L = len(c)
        orders = np.arange(-(L // 2), L // 2 + 1) if L % 2 else np.arange(L)
    o = np.asarray(orders, dtype=int)
    if len(o) != len(c):
        raise ParameterError("orders and coeffs differ in length")
    if len(o) == 0 or np.max(np.abs(o)) > MAX_ORDER:
        raise ParameterError(f"need 1..{MAX_ORDER} as mode orders")
    return HelmholtzField(float(kappa), o, c, np.asarray(center, dtype=float))


def plane_wave_coeffs(kappa: float, direction_angle: float, max_order: int = MAX_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi-Anger coefficients of ``exp(i kappa x.d)``: ``c_m = i^m e^{-i m phi}`` with ``J_{-m} = (-1)^m J_m``."""
    m = np.arange(-max_order, max_order + 1)
    c = (1j ** np.abs(m)) * np.exp(-1j * m * direction_angle)
    # J_|m| for negative m: i^m J_m = i^m (-1)^m J_|m| = i^|m| J_|m|
    return m, c


def random_fourier_bessel(rng: np.random.Generator, kappa: float, n_modes: int = 8, center=(0.0, 0.0)) -> HelmholtzField:
    orders = rng.choice(np.arange(-MAX_ORDER // 2, MAX_ORDER // 2 + 1), size=n_modes, replace=False)
    coeffs = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    return synth_helmholtz(kappa, coeffs, center, orders)


def helmholtz_residual(u: Callable, points, kappa: float, h: float) -> np.ndarray:
    """Relative 5-point residual of ``Delta u + kappa^2 u``.

    The scale is ``|u_xx| + |u_yy| + kappa^2 |u|``, the magnitudes of the terms
    being differenced.
    """
    x = np.asarray(points, dtype=float)
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    c = u(x)
    uxx = (u(x + ex) - 2 * c + u(x - ex)) / h**2
    uyy = (u(x + ey) - 2 * c + u(x - ey)) / h**2
    scale = np.abs(uxx) + np.abs(uyy) + kappa**2 * np.abs(c)
    return np.abs(uxx + uyy + kappa**2 * c) / np.maximum(scale, 1e-300)


# ---------------------------------------------------------------------------
# Sup norms
# ---------------------------------------------------------------------------


def ball_samples(center, radius: float, n_radial: int = 80, n_angular: int = 128) -> np.ndarray:
    """Polar sample grid on the closed ball (``n_radial * n_angular + 1`` points)."""
    r = radius * np.linspace(1.0 / n_radial, 1.0, n_radial)
    t = 2 * math.pi * np.arange(n_angular) / n_angular
    pts = np.asarray(center, dtype=float) + np.stack([np.outer(r, np.cos(t)), np.outer(r, np.sin(t))], axis=-1).reshape(-1, 2)
    return np.vstack([np.asarray(center, dtype=float)[None, :], pts])


def sup_norm(u: Callable, center, radius: float, **kw) -> float:
    vals = u(ball_samples(center, radius, **kw))
    mag = np.abs(vals) if vals.ndim == 1 else np.linalg.norm(vals, axis=-1)
    return float(mag.max())


# ---------------------------------------------------------------------------
# Three spheres
# ---------------------------------------------------------------------------


def beta_bracket(r1: float, r3: float, s: float, c: float = THREE_SPHERES_C) -> tuple[float, float]:
    """``[c log(r3/s) / log(r3/r1), 1 - c log(s/r1) / log(r3/r1)]``."""
    L = math.log(r3 / r1)
    return c * math.log(r3 / s) / L, 1.0 - c * math.log(s / r1) / L


@dataclass
class ThreeSpheresCase:
    center: np.ndarray
    r1: float
    r2: float
    r3: float
    s: float
    kappa: float
    field: Callable
    fitted_beta: float | None = None
    bracket: tuple[float, float] | None = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if not 0 < self.r1 < self.r2 < self.r3:
            raise ParameterError("need 0 < r1 < r2 < r3")
        if not self.r2 < self.s < self.r3:
            raise ParameterError("need r2 < s < r3")


@dataclass(frozen=True)
class ThreeSpheresReport:
    holds: bool
    fitted_beta: float
    bracket: tuple[float, float]
    beta_star: float
    norms: tuple[float, float, float]
    prefactor: float
    degenerate: bool = False


def three_spheres_check(case: ThreeSpheresCase, c: float = THREE_SPHERES_C, **sampling) -> ThreeSpheresReport:
    """Test ``|u|_{r2} <= (1 - r2/s)^{-3/2} |u|_{r3}^{1-beta} |u|_{r1}^beta`` for some admissible beta.

    ``beta_star`` is the largest beta for which the inequality holds with
    constant 1; it holds for every smaller beta.  The report's
    ``fitted_beta`` is ``min(beta_star, beta_hi)``.
    """
    m1, m2, m3 = (sup_norm(case.field, case.center, r, **sampling) for r in (case.r1, case.r2, case.r3))
    P = (1.0 - case.r2 / case.s) ** -1.5
    lo, hi = beta_bracket(case.r1, case.r3, case.s, c)
    if m1 <= 1e-300:
        case.fitted_beta, case.bracket = float("nan"), (lo, hi)
        return ThreeSpheresReport(False, float("nan"), (lo, hi), float("nan"), (m1, m2, m3), P, degenerate=True)
    span = math.log(m3) - math.log(m1)
    num = math.log(P) + math.log(m3) - math.log(m2)
    if span <= 1e-12 * max(1.0, abs(num)):
        beta_star = math.inf if num >= 0 else -math.inf
    else:
        beta_star = num / span
    holds = beta_star >= lo
    fitted = min(beta_star, hi) if holds else beta_star
    case.fitted_beta, case.bracket = fitted, (lo, hi)
    return ThreeSpheresReport(bool(holds), float(fitted), (lo, hi), float(beta_star), (m1, m2, m3), P)


def default_case(field: Callable, center, r: float, kappa: float) -> ThreeSpheresCase:
    """Radii ``(r, 2r, 4r)`` and ``s = 2 sqrt(2) r``."""
    return ThreeSpheresCase(np.asarray(center, dtype=float), r, 2 * r, 4 * r, 2 * math.sqrt(2) * r, kappa, field)


# ---------------------------------------------------------------------------
# Chains of balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallChain:
    polyline: np.ndarray
    r: float
    centers: np.ndarray
    N: int
    arc_positions: np.ndarray

    @property
    def length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.polyline, axis=0).T)))


def _point_at_arc(poly: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    k = int(np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(poly) - 2))
    seg = cum[k + 1] - cum[k]
    t = 0.0 if seg == 0 else (s - cum[k]) / seg
    return poly[k] + min(max(t, 0.0), 1.0) * (poly[k + 1] - poly[k])


def build_chain(polyline, r: float) -> BallChain:
    """Centres at equal arc-length spacing ``L/N <= r`` with ``N = ceil(L / r)``."""
    poly = np.asarray(polyline, dtype=float)
    if poly.ndim != 2 or len(poly) < 2:
        raise ParameterError("polyline needs at least two points")
    if not r > 0:
        raise ParameterError("ball radius must be positive")
    seg = np.hypot(*np.diff(poly, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    L = float(cum[-1])
    N = max(1, math.ceil(L / r - 1e-12))
    arcs = L * np.arange(N + 1) / N
    centers = np.array([_point_at_arc(poly, cum, s) for s in arcs])
    return BallChain(poly, float(r), centers, N, arcs)


@dataclass
class ChainDecayReport:
    norms: np.ndarray
    step_betas: np.ndarray
    beta: float
    empirical_exponents: np.ndarray
    holds: bool
    lhs: float
    rhs: float
    meta: dict = field(default_factory=dict)


def chain_decay_experiment(fld: Callable, chain: BallChain, T_bound: float, kappa: float = 1.0, **sampling) -> ChainDecayReport:
    """Sup norms ``m_k`` on the chain balls against ``m_last <= T m_1^{beta^N}``.

    Per-step exponents are the three-spheres betas at each centre with radii
    ``(r, 2r, 4r)``; the chain exponent is their minimum.
    """
    m = np.array([sup_norm(fld, c, chain.r, **sampling) for c in chain.centers])
    betas = []
    for c in chain.centers:
        rep = three_spheres_check(default_case(fld, c, chain.r, kappa), **sampling)
        betas.append(rep.fitted_beta)
    betas = np.array(betas)
    valid = betas[np.isfinite(betas)]
    beta = float(np.clip(valid.min(), 1e-12, 1 - 1e-12)) if len(valid) else float("nan")
    with np.errstate(divide="ignore", invalid="ignore"):
        emp = np.log(m[1:]) / np.log(m[:-1])
    rhs = T_bound * m[0] ** (beta**chain.N) if np.isfinite(beta) else float("nan")
    holds = bool(m[-1] <= rhs * (1 + 1e-12))
    return ChainDecayReport(m, betas, beta, emp, holds, float(m[-1]), float(rhs), {"N": chain.N, "r": chain.r})


# ---------------------------------------------------------------------------
# Far field to near field
# ---------------------------------------------------------------------------


def spearman(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if len(a) < 2:
        return float("nan")
    return float(stats.spearmanr(a, b).statistic)


@dataclass
class FarToNearConfig:
    base: forward.MediumScatterer
    family: list  # perturbed scatterers
    wave: object
    params: object
    cell_size: float
    bbox: tuple | None = None
    t: float = 1.25
    T_bound: float | None = None
    n_directions: int = forward.DEFAULT_DIRECTIONS
    n_ring: int = 96


@dataclass
class FarToNearReport:
    epsilon_list: list
    near_norm_list: list
    fitted_curve: dict
    residual_sqrtln: float
    residual_power: float
    rank_correlation: float
    flagged: list
    meta: dict = field(default_factory=dict)


def annulus_samples(R_in: float, R_out: float, n_ring: int, n_radii: int = 5) -> np.ndarray:
    t = 2 * math.pi * np.arange(n_ring) / n_ring
    rs = np.linspace(R_in, R_out, n_radii)
    return np.stack([np.outer(rs, np.cos(t)), np.outer(rs, np.sin(t))], axis=-1).reshape(-1, 2)


def _lsq_rss(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef, float(np.sum((A @ coef - y) ** 2))


def far_to_near_experiment(config: FarToNearConfig) -> FarToNearReport:
    """Far-field differences ``eps`` against near-field differences on ``B_{2tR} minus B_{tR}``.

    Fits ``log near = log A - c sqrt(ln(T / eps))`` and a power law
    ``log near = a + b log eps``; residual sums of squares are reported for both.
    """
    polys = [config.base.polygon] + [s.polygon for s in config.family]
    R = max(float(np.max(np.hypot(*p.vertices.T))) for p in polys)
    pts = annulus_samples(config.t * R, 2 * config.t * R, config.n_ring)
    bbox = config.bbox
    if bbox is None:
        xs = np.concatenate([p.vertices[:, 0] for p in polys])
        ys = np.concatenate([p.vertices[:, 1] for p in polys])
        h = config.cell_size
        bbox = (h * math.floor(xs.min() / h), h * math.ceil(xs.max() / h), h * math.floor(ys.min() / h), h * math.ceil(ys.max() / h))

    def run(sc):
        g = forward.build_grid(sc.polygon, config.cell_size, bbox=bbox)
        sol = forward.solve(sc, config.wave, g, config.params)
        return forward.far_field(sol, config.n_directions), forward.scattered_near_field(sol, pts)

    U0, n0 = run(config.base)
    eps, near, flagged = [], [], []
    norms = [forward.far_field_norm(U0)]
    for k, sc in enumerate(config.family):
        U, n = run(sc)
        norms.append(forward.far_field_norm(U))
        e = forward.far_field_norm(U - U0)
        d = float(np.max(np.linalg.norm(n - n0, axis=-1)))
        eps.append(e)
        near.append(d)
        if e <= NOISE_FLOOR:
            flagged.append(k)
    T = config.T_bound if config.T_bound is not None else 10.0 * max(norms)
    use = [k for k in range(len(eps)) if k not in flagged]
    fit, rss_s, rss_p = {}, float("nan"), float("nan")
    if len(use) >= 3:
        e = np.array([eps[k] for k in use])
        y = np.log([near[k] for k in use])
        xs = np.sqrt(np.log(T / e))
        coef, rss_s = _lsq_rss(xs, y)
        cp, rss_p = _lsq_rss(np.log(e), y)
        fit = {"A": float(math.exp(coef[0])), "c_hat": float(-coef[1]), "power_a": float(cp[0]), "power_b": float(cp[1]), "T": T}
    rho = spearman([eps[k] for k in use], [near[k] for k in use])
    return FarToNearReport(eps, near, fit, rss_s, rss_p, rho, flagged, {"R": R, "t": config.t, "n_points": len(pts)})
