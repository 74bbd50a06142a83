"""Legendre polynomials, fully normalized associated Legendre functions and
spherical harmonics, numerically stable up to degree 2000, plus the classical
large-degree zonal asymptotic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IndexRangeError, ResourceLimitError

DEGREE_LIMIT = 2000
_LOG_4PI = math.log(4.0 * math.pi)
# exp underflows to 0.0 a bit below -745; seeds smaller than this are flushed
_LOG_TINY = -744.0

# cumulative log prod_{j<=m} (2j-1)/(2j), extended lazily
_LOG_HALF_FACT = [0.0]


def _log_ratio_cum(m):
    while len(_LOG_HALF_FACT) <= m:
        j = len(_LOG_HALF_FACT)
        _LOG_HALF_FACT.append(_LOG_HALF_FACT[-1] + math.log((2 * j - 1) / (2 * j)))
    return _LOG_HALF_FACT[m]


@dataclass(frozen=True)
class HarmonicIndex:
    k: int
    m: int

    def __post_init__(self):
        if self.k < 0:
            raise IndexRangeError(f"degree k={self.k} must be nonnegative")
        if abs(self.m) > self.k:
            raise IndexRangeError(f"|m|={abs(self.m)} exceeds degree k={self.k}")


@dataclass(frozen=True)
class EvaluatedHarmonic:
    value: complex
    magnitude_sq: float


def _check_alpha(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(np.abs(a) > 1.0):
        raise DomainError("alpha outside [-1, 1] is not a valid cos(theta)")
    return a


def _check_degree(k):
    if k < 0:
        raise IndexRangeError(f"degree k={k} must be nonnegative")
    if k > DEGREE_LIMIT:
        raise ResourceLimitError(f"degree k={k} exceeds supported limit {DEGREE_LIMIT}")


def legendre_p(k, alpha):
    """P_k(alpha) by the three-term recurrence; |result| <= 1."""
    k = int(k)
    _check_degree(k)
    a = _check_alpha(alpha)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    p_prev = np.ones_like(a)
    if k == 0:
        out = p_prev
    else:
        p = a.copy()
        for j in range(1, k):
            p, p_prev = ((2 * j + 1) * a * p - j * p_prev) / (j + 1), p
        out = p
    return float(out[0]) if scalar else out


def legendre_p_pair(k, alpha):
    """(P_{k-1}, P_k) in one recurrence pass, for residual checks."""
    k = int(k)
    _check_degree(k)
    if k == 0:
        raise IndexRangeError("pair needs k >= 1")
    a = np.atleast_1d(_check_alpha(alpha))
    p_prev = np.ones_like(a)
    p = a.copy()
    for j in range(1, k):
        p, p_prev = ((2 * j + 1) * a * p - j * p_prev) / (j + 1), p
    return p_prev, p


def _seed_log(m, sin2):
    # log |P̄_{m,m}| with sin2 = 1 - alpha^2 = sin^2(theta); the m = 0 seed
    # has no sin factor, and sin2 = 0 with m > 0 must flush to -inf, not nan
    const = 0.5 * (math.log(2 * m + 1) - _LOG_4PI + _log_ratio_cum(m))
    if m == 0:
        return np.full_like(sin2, const)
    with np.errstate(divide="ignore"):
        return const + 0.5 * m * np.log(sin2)


def assoc_ladder(m, k_max, alpha):
    """All fully normalized P̄_{k,m}(alpha) for k = |m| .. k_max.

    Returns an array of shape (k_max - |m| + 1,) + alpha.shape.  The seed is
    computed in the log domain so sin(theta)^m underflows cleanly to zero
    instead of overflowing intermediates; the upward recurrence coefficients
    are all O(1).
    """
    m = int(m)
    k_max = int(k_max)
    _check_degree(k_max)
    if abs(m) > k_max:
        raise IndexRangeError(f"|m|={abs(m)} exceeds k_max={k_max}")
    a = _check_alpha(alpha)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    am = abs(m)
    sin2 = np.clip(1.0 - a * a, 0.0, 1.0)

    lg = _seed_log(am, sin2)
    seed = np.where(lg > _LOG_TINY, np.exp(lg), 0.0)
    sign = -1.0 if (am % 2) else 1.0
    p_km = sign * seed  # P̄_{am,am}, Condon-Shortley included
    out = np.empty((k_max - am + 1,) + a.shape)
    out[0] = p_km
    p_prev = np.zeros_like(a)
    for k in range(am, k_max):
        A = math.sqrt((2 * k + 1) * (2 * k + 3) / ((k + 1 - am) * (k + 1 + am)))
        if k == am:
            B = 0.0
        else:
            B = math.sqrt((2 * k + 3) * (k - am) * (k + am) / ((2 * k - 1) * (k + 1 - am) * (k + 1 + am)))
        p_km, p_prev = A * a * p_km - B * p_prev, p_km
        out[k - am + 1] = p_km
    if m < 0:
        out *= -1.0 if (am % 2) else 1.0
    return out[:, 0] if scalar else out


def assoc_legendre_normalized(k, m, alpha):
    """sqrt((2k+1)/(4pi) (k-m)!/(k+m)!) P_{k,m}(alpha), Condon-Shortley sign."""
    k, m = int(k), int(m)
    _check_degree(k)
    if abs(m) > k:
        raise IndexRangeError(f"|m|={abs(m)} exceeds degree k={k}")
    vals = assoc_ladder(m, k, alpha)
    return vals[-1] if np.ndim(vals) > np.ndim(np.asarray(alpha)) else vals


def spherical_harmonic(k, m, theta, phi):
    """Y_{k,m}(theta, phi) = P̄_{k,m}(cos theta) e^{i m phi}."""
    if not (0.0 <= theta <= math.pi):
        raise DomainError(f"theta={theta} outside [0, pi]")
    pbar = float(assoc_legendre_normalized(k, m, math.cos(theta)))
    value = pbar * complex(math.cos(m * phi), math.sin(m * phi))
    return EvaluatedHarmonic(value=value, magnitude_sq=pbar * pbar)


def zonal_asymptotic(k, theta):
    """Main term sqrt(2/(pi k sin theta)) cos((k+1/2)theta - pi/4) of P_k(cos theta)."""
    k = int(k)
    _check_degree(k)
    s = math.sin(theta)
    if k * s <= 1.0:
        raise DomainError(f"k*sin(theta)={k * s:.3g} <= 1: outside the asymptotic regime")
    return math.sqrt(2.0 / (math.pi * k * s)) * math.cos((k + 0.5) * theta - math.pi / 4.0)


def addition_theorem_sum(k, theta, phi=None):
    """sum_m |Y_{k,m}(theta,phi)|^2, computed mode by mode (no closed form).

    phi drops out since |e^{im phi}| = 1; it is accepted for interface
    symmetry.  theta may be an array.
    """
    alpha = np.cos(np.asarray(theta, dtype=float))
    total = np.zeros_like(np.atleast_1d(alpha))
    a = np.atleast_1d(alpha)
    for m in range(0, k + 1):
        pbar = assoc_ladder(m, k, a)[-1]
        total = total + (pbar * pbar if m == 0 else 2.0 * pbar * pbar)
    return float(total[0]) if np.ndim(alpha) == 0 else total
