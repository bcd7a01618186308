"""Bessel, Hankel and incomplete Gamma functions.

The Bessel routines cover orders 0 and 1 only, which is all the 2D elastic
fundamental tensor needs.  They are vectorised over ``x`` so the solver can
assemble dense matrices without a Python loop per entry.

Small arguments use the ascending power series, large arguments the Hankel
asymptotic expansion.  ``SERIES_SWITCH`` is the seam between the branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061

#: Arguments below this use the power series, at or above it the asymptotic
#: expansion.  Both branches agree to ~1e-11 here.
SERIES_SWITCH = 12.0

_N_SERIES = 64
_N_ASYMPT = 40

# psi(k+1) = -gamma + H_k for k = 0.._N_SERIES
_HARMONIC = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, _N_SERIES + 2))])
_PSI = -EULER_GAMMA + _HARMONIC


class SpecialFunctionDomainError(ValueError):
    """Argument outside the domain of a special function."""


def _asympt_coeffs(order: int) -> np.ndarray:
    mu = 4.0 * order * order
    a = np.empty(_N_ASYMPT)
    a[0] = 1.0
    for k in range(1, _N_ASYMPT):
        a[k] = a[k - 1] * (mu - (2 * k - 1) ** 2) / (k * 8.0)
    return a


_ASYMPT = {0: _asympt_coeffs(0), 1: _asympt_coeffs(1)}


def _series01(x: np.ndarray):
    """J0, J1, Y0, Y1 from the ascending series (x > 0 for the Y part)."""
    x = np.asarray(x, dtype=float)
    q = -0.25 * x * x
    # t0_k = q^k / (k!)^2 and t1_k = q^k / (k! (k+1)!)
    t0 = np.ones_like(x)
    t1 = np.ones_like(x)
    j0 = np.zeros_like(x)
    j1 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    for k in range(_N_SERIES):
        j0 += t0
        j1 += t1
        s0 += _PSI[k] * t0
        s1 += (_PSI[k] + _PSI[k + 1]) * t1
        t0 = t0 * q / ((k + 1) * (k + 1))
        t1 = t1 * q / ((k + 1) * (k + 2))
        if k > 4 and np.max(np.abs(t0)) < 1e-18:
            break
    half = 0.5 * x
    j1 = half * j1
    with np.errstate(divide="ignore", invalid="ignore"):
        log_half = np.log(half)
        y0 = (2.0 / math.pi) * (log_half * j0 - s0)
        y1 = -2.0 / (math.pi * x) + (2.0 / math.pi) * log_half * j1 - half * s1 / math.pi
    return j0, j1, y0, y1


def _asymptotic(order: int, x: np.ndarray) -> np.ndarray:
    """H^(1)_order(x) from the Hankel expansion, truncated at its smallest term."""
    a = _ASYMPT[order]
    inv = 1.0 / x
    total = np.zeros(x.shape, dtype=complex)
    term_mag_prev = np.full(x.shape, np.inf)
    active = np.ones(x.shape, dtype=bool)
    power = np.ones_like(x)
    ik = 1.0 + 0.0j
    for k in range(_N_ASYMPT):
        term = ik * a[k] * power
        mag = np.abs(a[k]) * power
        active &= mag < term_mag_prev
        total += np.where(active, term, 0.0)
        term_mag_prev = mag
        power = power * inv
        ik *= 1j
    chi = x - 0.5 * order * math.pi - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * np.exp(1j * chi) * total


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def bessel(kind: str, order: int, x):
    """Bessel function of the first (``"J"``) or second (``"Y"``) kind.

    Parameters
    ----------
    kind : {"J", "Y"}
    order : {0, 1}
    x : float or array_like
        ``x >= 0`` for J, ``x > 0`` for Y.
    """
    if kind not in ("J", "Y"):
        raise ValueError(f"unknown Bessel kind {kind!r}")
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    arr, scalar = _as_array(x)
    if kind == "Y" and np.any(arr <= 0):
        raise SpecialFunctionDomainError("Y_n(x) requires x > 0")
    if kind == "J" and np.any(arr < 0):
        raise SpecialFunctionDomainError("J_n(x) implemented for x >= 0 only")
    out = np.empty(arr.shape)
    small = arr < SERIES_SWITCH
    if np.any(small):
        j0, j1, y0, y1 = _series01(arr[small])
        out[small] = {("J", 0): j0, ("J", 1): j1, ("Y", 0): y0, ("Y", 1): y1}[kind, order]
    big = ~small
    if np.any(big):
        h = _asymptotic(order, arr[big])
        out[big] = h.real if kind == "J" else h.imag
    return float(out) if scalar else out


def hankel01(x):
    """Return ``(H0^(1)(x), H1^(1)(x))`` for ``x > 0`` in one pass."""
    arr, scalar = _as_array(x)
    if np.any(arr <= 0):
        raise SpecialFunctionDomainError("Hankel functions require x > 0")
    h0 = np.empty(arr.shape, dtype=complex)
    h1 = np.empty(arr.shape, dtype=complex)
    small = arr < SERIES_SWITCH
    if np.any(small):
        j0, j1, y0, y1 = _series01(arr[small])
        h0[small] = j0 + 1j * y0
        h1[small] = j1 + 1j * y1
    big = ~small
    if np.any(big):
        xb = arr[big]
        h0[big] = _asymptotic(0, xb)
        h1[big] = _asymptotic(1, xb)
    if scalar:
        return complex(h0), complex(h1)
    return h0, h1


def hankel1(order: int, x):
    """Hankel function of the first kind, ``H^(1)_order = J_order + i Y_order``."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    return hankel01(x)[order]


# ---------------------------------------------------------------------------
# Incomplete Gamma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IncompleteGammaPair:
    s: float
    x: float
    lower: float
    upper: float

    @property
    def complete(self) -> float:
        return math.gamma(self.s)


def _gamma_series(s: float, x: float) -> float:
    # gamma(s, x) = x^s e^-x sum_k x^k / (s (s+1) ... (s+k))
    term = 1.0 / s
    total = term
    a = s
    for _ in range(1000):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + s * math.log(x))


def _gamma_continued_fraction(s: float, x: float) -> float:
    # Modified Lentz evaluation of the continued fraction for Gamma(s, x)
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + s * math.log(x)) * h


def incomplete_gamma(s: float, x: float) -> IncompleteGammaPair:
    """Lower and upper incomplete Gamma functions ``gamma(s, x)``, ``Gamma(s, x)``."""
    if not s > 0:
        raise SpecialFunctionDomainError("shape s must be positive")
    if x < 0:
        raise SpecialFunctionDomainError("cut x must be non-negative")
    full = math.gamma(s)
    if x == 0:
        return IncompleteGammaPair(s, x, 0.0, full)
    if x < s + 1.0:
        lower = _gamma_series(s, x)
        upper = full - lower
    else:
        upper = _gamma_continued_fraction(s, x)
        lower = full - upper
    return IncompleteGammaPair(s, x, max(lower, 0.0), max(upper, 0.0))


@dataclass(frozen=True)
class GammaBoundReport:
    holds_lower: bool
    holds_upper: bool
    slack: float  # upper-bound slack, 2^s Gamma(s) e^{-x/2} - Gamma(s, x)
    slack_lower: float
    slack_upper: float


def gamma_bound_check(s: float, x: float) -> GammaBoundReport:
    """Check ``gamma(s,x) <= Gamma(s)`` and ``Gamma(s,x) <= 2^s Gamma(s) e^{-x/2}``."""
    pair = incomplete_gamma(s, x)
    full = pair.complete
    slack_lo = full - pair.lower
    slack_up = 2.0**s * full * math.exp(-0.5 * x) - pair.upper
    # rounding: the lower bound is tight as x -> inf
    tol = 1e-12 * full
    return GammaBoundReport(
        holds_lower=slack_lo >= -tol,
        holds_upper=slack_up >= -tol,
        slack=slack_up,
        slack_lower=slack_lo,
        slack_upper=slack_up,
    )
