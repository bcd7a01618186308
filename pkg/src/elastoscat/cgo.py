"""Complex geometrical optics (CGO) probe fields.

``u0(x) = exp(xi.(x - x0)) eta`` with ``xi.xi = -kappa_s^2`` and ``xi.eta = 0``
is a divergence-free solution of the homogeneous Navier equation that decays
exponentially along ``-p``.  The module also evaluates the sector integral of
the exponential over a vertex cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .geometry import Cone2D
from .material import ParameterError, rot90

OVERFLOW_EXPONENT = 700.0
TAU_GRID_POINTS = 50


class FrameError(ValueError):
    pass


class CgoOverflowError(OverflowError):
    pass


class DivergenceError(ValueError):
    pass


class DegenerateConfigurationError(ValueError):
    pass


def cdot(a, b) -> np.ndarray:
    """Complex bilinear dot product (no conjugation) over the last axis."""
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


@dataclass(frozen=True)
class CgoParams:
    x0: np.ndarray
    p: np.ndarray
    p_perp: np.ndarray
    tau: float
    kappa_s: float
    xi: np.ndarray
    eta: np.ndarray

    @property
    def stretch(self) -> float:
        """``sqrt(1 + kappa_s^2 / tau^2)``, the factor in ``eta``."""
        return math.sqrt(1.0 + (self.kappa_s / self.tau) ** 2)


def make_cgo(x0, p, p_perp, tau: float, kappa_s: float) -> CgoParams:
    """Build ``xi = tau p + i sqrt(kappa_s^2 + tau^2) p_perp`` and ``eta = p_perp - i sqrt(1 + kappa_s^2/tau^2) p``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(p_perp, dtype=float)
    if not kappa_s > 0:
        raise ParameterError("kappa_s must be positive")
    if not tau > kappa_s:
        raise ParameterError(f"tau = {tau} must exceed kappa_s = {kappa_s}")
    if abs(np.hypot(*p) - 1) > 1e-10 or abs(np.hypot(*q) - 1) > 1e-10 or abs(np.dot(p, q)) > 1e-10:
        raise FrameError("p and p_perp must be orthonormal")
    tau = float(tau)
    xi = tau * p + 1j * math.sqrt(kappa_s**2 + tau**2) * q
    eta = q - 1j * math.sqrt(1.0 + (kappa_s / tau) ** 2) * p
    return CgoParams(np.asarray(x0, dtype=float), p, q, tau, float(kappa_s), xi, eta)


def _exponent(params: CgoParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    e = cdot(x - params.x0, params.xi)
    if np.any(e.real > OVERFLOW_EXPONENT):
        raise CgoOverflowError("CGO exponent exceeds the overflow guard; stay in the decaying half-plane")
    return e


def cgo_field(params: CgoParams, x) -> np.ndarray:
    """``u0(x) = exp(xi.(x - x0)) eta`` at points of shape (..., 2)."""
    e = np.exp(_exponent(params, x))
    return e[..., None] * params.eta


def cgo_traction(params: CgoParams, x, normal, mu: float) -> np.ndarray:
    """Closed-form traction ``mu exp(xi.(x-x0)) [(xi.nu) eta + (eta.nu) xi]`` (``u0`` is divergence-free)."""
    e = np.exp(_exponent(params, x))
    nu = np.asarray(normal, dtype=float)
    xn = cdot(params.xi, nu)
    en = cdot(params.eta, nu)
    return mu * e[..., None] * (np.asarray(xn)[..., None] * params.eta + np.asarray(en)[..., None] * params.xi)


# ---------------------------------------------------------------------------
# Choice of p_perp
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PPerpChoice:
    p_perp: np.ndarray
    C0_witness: float  # min over the tau grid of |u(x0).eta(tau)|
    C0_bound: float  # tau-independent lower bound for the chosen frame
    case: str  # sign of Im u(x0).p: "I" (> 0), "II" (= 0), "III" (< 0)
    witness_other: float
    bound_other: float


def tau_grid(kappa_s: float, n: int = TAU_GRID_POINTS) -> np.ndarray:
    return np.geomspace(2 * kappa_s, 1e4 * kappa_s, n)


def _frame_bound(u: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    # u.eta = (a + s b) + i (c - s d) with s = sqrt(1 + kappa_s^2/tau^2) >= 1
    a, c = float(np.real(u @ q)), float(np.imag(u @ q))
    d, b = float(np.real(u @ p)), float(np.imag(u @ p))
    b_re = abs(a + b) if a * b >= 0 else 0.0
    b_im = abs(c - d) if c * d <= 0 else 0.0
    return max(b_re, b_im)


def _frame_witness(u: np.ndarray, p: np.ndarray, q: np.ndarray, taus: np.ndarray, kappa_s: float) -> float:
    s = np.sqrt(1.0 + (kappa_s / taus) ** 2)
    vals = np.abs((u @ q) - 1j * s * (u @ p))
    return float(vals.min())


def choose_p_perp(u_x0, p, kappa_s: float = 1.0, taus=None) -> PPerpChoice:
    """Pick ``p_perp = +-rot90(p)`` keeping ``|u(x0).eta(tau)|`` away from zero for all tau.

    Flipping ``p_perp`` changes ``|u.eta|^2`` by ``4 s (ab - cd)`` with the
    notation of ``_frame_bound``, so the sign of ``ab - cd`` selects the frame
    that is better for every tau at once.
    """
    u = np.asarray(u_x0, dtype=complex)
    if not np.any(np.abs(u) > 0):
        raise ValueError("u(x0) must be nonzero")
    p = np.asarray(p, dtype=float)
    q = rot90(p)
    taus = tau_grid(kappa_s) if taus is None else np.asarray(taus, dtype=float)
    a, c = float(np.real(u @ q)), float(np.imag(u @ q))
    d, b = float(np.real(u @ p)), float(np.imag(u @ p))
    if a * b - c * d < 0:
        q = -q
    other = -q
    w, w_o = _frame_witness(u, p, q, taus, kappa_s), _frame_witness(u, p, other, taus, kappa_s)
    bnd, bnd_o = _frame_bound(u, p, q), _frame_bound(u, p, other)
    if w_o > w:  # only possible at ab = cd, where the frames tie up to rounding
        q, other, w, w_o, bnd, bnd_o = other, q, w_o, w, bnd_o, bnd
    if bnd == 0 and bnd_o == 0 and w <= 1e-14 * np.linalg.norm(u):
        raise DegenerateConfigurationError("both frames give a vanishing lower bound")
    case = "I" if b > 0 else ("III" if b < 0 else "II")
    return PPerpChoice(q, w, bnd, case, w_o, bnd_o)


# ---------------------------------------------------------------------------
# Sector integral
# ---------------------------------------------------------------------------


def _f(params: CgoParams, theta):
    th = np.asarray(theta, dtype=float)
    return params.xi[0] * np.cos(th) + params.xi[1] * np.sin(th)


def _g(params: CgoParams, theta):
    th = np.asarray(theta, dtype=float)
    return -params.xi[0] * np.sin(th) + params.xi[1] * np.cos(th)


def sector_integral(cone: Cone2D, params: CgoParams, method: str = "closed") -> complex:
    """``int_A exp(xi.(x - x0)) dx`` over the infinite sector ``A``.

    In polar coordinates about the apex this is ``int dtheta / (xi.w(theta))^2``.
    ``method="closed"`` uses the antiderivative ``(xi.w_perp)/(kappa_s^2 xi.w)``;
    ``method="quad"`` integrates adaptively to relative 1e-10.
    """
    t1, t2 = cone.angle_range
    if not np.allclose(cone.apex, params.x0):
        raise ValueError("cone apex and CGO centre differ")
    th = np.linspace(t1, t2, 257)
    if np.any(_f(params, th).real >= 0):
        raise DivergenceError("Re xi.w(theta) must be negative across the sector")
    if method == "closed":
        ratio = lambda t: complex(_g(params, t) / _f(params, t))  # noqa: E731
        return (ratio(t2) - ratio(t1)) / params.kappa_s**2
    if method == "quad":
        # absolute floor: the imaginary part nearly cancels for symmetric frames
        floor = 1e-13 * (t2 - t1) * float(np.max(np.abs(1.0 / _f(params, th) ** 2)))
        re = integrate.quad(lambda t: (1.0 / _f(params, t) ** 2).real, t1, t2, epsabs=floor, epsrel=1e-10, limit=200)[0]
        im = integrate.quad(lambda t: (1.0 / _f(params, t) ** 2).imag, t1, t2, epsabs=floor, epsrel=1e-10, limit=200)[0]
        return complex(re, im)
    raise ValueError(f"unknown method {method!r}")


def truncated_sector_integral(cone: Cone2D, params: CgoParams, radius: float, n_theta: int = 96, n_radial: int = 24, n_panels: int = 12) -> complex:
    """``int_{A cap B_radius} exp(xi.(x - x0)) dx`` by tensor Gauss-Legendre in polar coordinates."""
    t1, t2 = cone.angle_range
    xt, wt = np.polynomial.legendre.leggauss(n_theta)
    th = 0.5 * (t2 - t1) * (xt + 1) + t1
    wth = 0.5 * (t2 - t1) * wt
    xr, wr = np.polynomial.legendre.leggauss(n_radial)
    edges = np.linspace(0.0, radius, n_panels + 1)
    f = _f(params, th)
    total = 0.0 + 0.0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi - lo) * (xr + 1) + lo
        w = 0.5 * (hi - lo) * wr
        total += np.sum(wth[:, None] * w[None, :] * r[None, :] * np.exp(f[:, None] * r[None, :]))
    return complex(total)
