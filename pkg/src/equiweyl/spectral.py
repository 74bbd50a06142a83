"""Reduced spectral functions, counting functions, cluster sums, circle-average
(Kuznecov-type) sums, and cluster L^p norms over a truncated eigenbasis.

Two layers: basis-backed operations on EigenBasis objects, and direct
closed-form evaluators for the analytic models (used for large-lambda scans
where materializing (k+1)^2 sphere modes would be wasteful).  The two layers
are cross-checked against each other in the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError, EmptyWindowError, ResolutionError, TruncationError
from .eigensolve import EigenBasis, sphere_k_max
from .geometry import (
    FlatTorus2,
    FlatTorus2FiniteCyclic,
    IsotypicLabel,
    RoundSphere2,
    SurfaceOfRevolution,
    label_int,
)
from .util import gauss_nodes, pairwise_sum

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ReducedSpectralFunction:
    basis: EigenBasis
    label: IsotypicLabel

    def __post_init__(self):
        if not isinstance(self.label, IsotypicLabel):
            object.__setattr__(self, "label", IsotypicLabel(int(self.label)))


@dataclass(frozen=True)
class ClusterSum:
    lam: float
    value: float
    mode_count: int


# ---------------------------------------------------------------------------
# direct closed-form layer (no basis object required)


def sphere_label_cumsum(m, alpha, k_max):
    """Cumulative sums S_K = sum_{k=|m|}^{K} Pbar_{k,m}(alpha)^2.

    Returns (k_grid, S) with k_grid = |m|..k_max; alpha scalar or array
    (S gets a trailing point axis for arrays).
    """
    m = int(m)
    if k_max < abs(m):
        return np.array([], dtype=int), np.zeros((0,) + np.shape(np.atleast_1d(alpha)))
    lad = specfun.assoc_ladder(m, k_max, np.atleast_1d(np.asarray(alpha, dtype=float)))
    sq = lad * lad
    return np.arange(abs(m), k_max + 1), np.cumsum(sq, axis=0)


def sphere_diag_direct(m, theta, lam):
    """e_m(x, x, lambda) on the round sphere at colatitude theta."""
    if lam < 0:
        return np.zeros(np.shape(theta)) if np.ndim(theta) else 0.0
    k_hi = sphere_k_max(lam)
    if k_hi < abs(int(m)):
        return np.zeros(np.shape(theta)) if np.ndim(theta) else 0.0
    alpha = np.cos(np.asarray(theta, dtype=float))
    _, cum = sphere_label_cumsum(m, alpha, k_hi)
    out = cum[-1]
    return float(out[0]) if np.ndim(theta) == 0 else out


def sphere_count_direct(m, lam):
    if lam < 0:
        return 0
    return max(0, sphere_k_max(lam) - abs(int(m)) + 1)


def _torus_k2_count(rem):
    # number of integers k2 with k2^2 <= rem, guarded against float fuzz
    if rem < 0:
        return 0
    q = int(math.floor(math.sqrt(rem)))
    while (q + 1) * (q + 1) <= rem:
        q += 1
    while q >= 0 and q * q > rem:
        q -= 1
    return 2 * q + 1 if q >= 0 else 0


def torus_count_direct(m, lam, order=0):
    """Lattice count of modes with eigenvalue <= lam in the label class.

    order = 0: circle action, label m = k1.  order = N: cyclic action,
    label is the residue of k1 mod N.
    """
    if lam < 0:
        return 0
    R2 = lam / (4.0 * math.pi * math.pi)
    if order == 0:
        return _torus_k2_count(R2 - m * m)
    r = int(m) % order
    span = int(math.floor(math.sqrt(R2))) + 1
    total = 0
    for k1 in range(-span, span + 1):
        if k1 % order == r:
            total += _torus_k2_count(R2 - k1 * k1)
    return total


def torus_diag_direct(m, lam, order=0):
    # every torus mode has |e_j(x)|^2 = 1, so the diagonal equals the count
    return float(torus_count_direct(m, lam, order))


# ---------------------------------------------------------------------------
# basis-backed layer


def _diag_by_modes(rsf, x, lam):
    """Reference route: literal sum of |e_j(x)|^2 over matching modes."""
    vals = [
        md.density(x)
        for md in rsf.basis.modes_with_label(rsf.label)
        if md.eigenvalue <= lam
    ]
    if not vals:
        return 0.0
    return float(pairwise_sum(np.array(vals)))


def _sphere_theta(x):
    x = np.asarray(x, dtype=float)
    return math.acos(max(-1.0, min(1.0, x[2])))


def reduced_spectral_diag(rsf, x, lam):
    basis = rsf.basis
    basis.require(lam)
    if lam < 0:
        return 0.0
    man = basis.manifold
    m = rsf.label.m
    if isinstance(man, RoundSphere2):
        return sphere_diag_direct(m, _sphere_theta(x), lam)
    if isinstance(man, FlatTorus2):
        return torus_diag_direct(m, lam)
    if isinstance(man, FlatTorus2FiniteCyclic):
        return torus_diag_direct(m, lam, order=man.order)
    return _diag_by_modes(rsf, x, lam)


def counting_function(rsf, lam):
    basis = rsf.basis
    basis.require(lam)
    if lam < 0:
        return 0
    man = basis.manifold
    m = rsf.label.m
    if isinstance(man, RoundSphere2):
        return sphere_count_direct(m, lam)
    if isinstance(man, FlatTorus2):
        return torus_count_direct(m, lam)
    if isinstance(man, FlatTorus2FiniteCyclic):
        return torus_count_direct(m, lam, order=man.order)
    return sum(1 for md in basis.modes_with_label(rsf.label) if md.eigenvalue <= lam)


def cluster_sum(rsf, x, lam):
    rsf.basis.require(lam + 1.0)
    hi = reduced_spectral_diag(rsf, x, lam + 1.0)
    lo = reduced_spectral_diag(rsf, x, lam)
    count = counting_function(rsf, lam + 1.0) - counting_function(rsf, lam)
    return ClusterSum(float(lam), max(0.0, hi - lo), int(count))


# ---------------------------------------------------------------------------
# circle / cyclic group averages


def _group_nodes(basis, n_quad=None):
    """Canonical group parameters: angles in [0, 2 pi) for the sphere and
    surfaces of revolution, shifts in [0, 1) for the torus circle, integers
    0..N-1 for cyclic actions."""
    if basis.group_order:
        return np.arange(basis.group_order, dtype=float), basis.group_order
    span = max([abs(md.label.m) for md in basis.modes], default=0)
    n = n_quad or max(8, 2 * span + 2)
    if isinstance(basis.manifold, FlatTorus2):
        return np.arange(n) / n, n
    return np.arange(n) * (_TWO_PI / n), n


def _label_average_factor(basis, t_nodes, n):
    """Trapezoid average of the action phase per label: exact for n > |m|."""
    out = {}
    for md in basis.modes:
        m = md.label.m
        if m in out:
            continue
        if basis.group_order:
            ph = np.exp(-2j * math.pi * m * t_nodes / basis.group_order)
        elif isinstance(basis.manifold, FlatTorus2):
            ph = np.exp(-2j * math.pi * m * t_nodes)
        else:
            ph = np.exp(-1j * m * t_nodes)
        out[m] = complex(pairwise_sum(ph.real) + 1j * pairwise_sum(ph.imag)) / n
    return out


def kuznecov_sum(basis, x, lam, n_quad=None):
    """Sum over lambda_j <= lam of |group average of e_j at x|^2.

    The group average factors through the isotypic phase (the quadrature
    acts on the phase alone); the result is cross-checked against the
    trivial-label diagonal, which it must equal for abelian actions.
    """
    basis.require(lam)
    t_nodes, n = _group_nodes(basis, n_quad)
    fac = _label_average_factor(basis, t_nodes, n)
    terms = []
    for md in basis.modes:
        if md.eigenvalue > lam:
            continue
        weight = abs(fac[md.label.m]) ** 2
        if weight <= 1e-30:
            # the phase average vanished identically; skip the evaluation
            continue
        terms.append(md.density(x) * weight)
    value = float(pairwise_sum(np.array(terms))) if terms else 0.0
    trivial = IsotypicLabel(0, modulus=basis.group_order or None)
    ref = reduced_spectral_diag(ReducedSpectralFunction(basis, trivial), x, lam)
    assert abs(value - ref) <= 1e-10 * (1.0 + abs(ref)), (value, ref)
    return value


def kuznecov_sum_by_rotation(basis, x, lam, n_quad=None):
    """Literal route: evaluate each mode at rotated points and average."""
    from .geometry import cotangent_point, rotate_cotangent

    basis.require(lam)
    t_nodes, n = _group_nodes(basis, n_quad)
    man = basis.manifold
    zero_xi = (
        np.zeros(3) if isinstance(man, RoundSphere2) else np.zeros(2)
    )
    pt = cotangent_point(man, x, zero_xi)
    pts = [rotate_cotangent(man, pt, -float(t)).x for t in t_nodes]
    total = 0.0
    for md in basis.modes:
        if md.eigenvalue > lam:
            continue
        avg = sum(md.evaluator(p) for p in pts) / n
        total += abs(avg) ** 2
    return float(total)


# ---------------------------------------------------------------------------
# cluster L^p norms


def lp_node_rule(k_eff):
    return max(64, 2 * int(k_eff) + 8), max(64, 4 * int(k_eff) + 8)


def _top_window_mode(rsf, lam):
    window = [
        md
        for md in rsf.basis.modes_with_label(rsf.label)
        if lam < md.eigenvalue <= lam + 1.0
    ]
    if not window:
        raise EmptyWindowError(f"no modes with label {rsf.label.m} in ({lam}, {lam + 1}]")
    return max(window, key=lambda md: (md.eigenvalue, md.quantum))


def _refined_max(values, evaluate, coarse_grid):
    i = int(np.argmax(values))
    lo = coarse_grid[max(0, i - 1)]
    hi = coarse_grid[min(len(coarse_grid) - 1, i + 1)]
    fine = np.linspace(lo, hi, 4 * 16 + 1)
    return max(float(np.max(values)), float(np.max(evaluate(fine))))


def cluster_lp_norm(rsf, lam, p, quad=None):
    """L^p(M) norm of the top mode in the window (lam, lam+1].

    quad: optional (n_polar, n_azimuth); if it under-resolves the mode's
    oscillation per the node rule a resolution error is raised.  p = inf is
    a refined grid maximum (a certified lower bound).
    """
    if not (p >= 2):
        raise DomainError("p must lie in [2, inf]")
    rsf.basis.require(lam + 1.0)
    md = _top_window_mode(rsf, lam)
    man = rsf.basis.manifold
    k_eff = int(math.ceil(md.mu))
    if isinstance(man, RoundSphere2):
        k_eff = md.quantum[0]
    n_pol, n_az = lp_node_rule(k_eff)
    if quad is not None:
        if quad[0] < n_pol or quad[1] < n_az:
            raise ResolutionError(
                f"quadrature {quad} under-resolves degree {k_eff}; need >= ({n_pol}, {n_az})"
            )
        n_pol, n_az = quad

    if isinstance(man, RoundSphere2):
        k, m = md.quantum
        nodes, weights = gauss_nodes(n_pol)
        pbar = specfun.assoc_ladder(m, k, nodes)[-1] if k >= abs(m) else np.zeros(n_pol)
        if math.isinf(p):
            def ev(alpha_grid):
                return np.abs(specfun.assoc_ladder(m, k, alpha_grid)[-1])

            best = _refined_max(np.abs(pbar), ev, nodes)
            for pole in (-1.0, 1.0):  # grid never contains the poles
                best = max(best, abs(float(specfun.assoc_ladder(m, k, np.array([pole]))[-1][0])))
            return best
        # |Y|^p is azimuth-independent; the azimuth factor of the product
        # rule sums to 2 pi exactly
        integral = _TWO_PI * float(weights @ np.abs(pbar) ** p)
        return integral ** (1.0 / p)

    if isinstance(man, (FlatTorus2, FlatTorus2FiniteCyclic)):
        # |exp| = 1 everywhere: every L^p norm is exactly 1 on unit area
        if math.isinf(p):
            return 1.0
        grid = (np.arange(n_az) + 0.5) / n_az
        vals = np.ones((n_az, n_az))
        integral = float(np.sum(vals**p)) / (n_az * n_az)
        del grid
        return integral ** (1.0 / p)

    if isinstance(man, SurfaceOfRevolution):
        L = man.length
        s = np.linspace(0.0, L, n_pol, endpoint=not man.closed)
        u = np.abs(np.array([md.evaluator((si, 0.0)) for si in s]))
        r = np.asarray(man.r(s), dtype=float)
        if math.isinf(p):
            def ev(sg):
                return np.abs(np.array([md.evaluator((si, 0.0)) for si in sg]))

            return _refined_max(u, ev, s)
        if man.closed:
            integral = _TWO_PI * float(np.sum(u**p * r)) * (L / n_pol)
        else:
            integral = _TWO_PI * float(np.trapezoid(u**p * r, s))
        return integral ** (1.0 / p)
    raise DomainError(f"unsupported manifold {man!r}")


def exponent_delta(n, kappa, q):
    if not (q >= 1):
        raise DomainError("q must lie in [1, inf]")
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    return max((n - kappa) * abs(0.5 - inv_q) - 0.5, 0.0)


# ---------------------------------------------------------------------------
# CSV emission


def csv_rows(records):
    """records: iterable of dicts with keys lambda, label, x, value, kind."""
    lines = ["lambda,label,x0,x1,x2,value,kind"]
    for rec in records:
        coords = list(np.atleast_1d(np.asarray(rec["x"], dtype=float)))
        coords = coords + [math.nan] * (3 - len(coords))
        xs = ",".join("" if math.isnan(c) else f"{c:.17g}" for c in coords[:3])
        lines.append(
            f"{rec['lambda']:.17g},{rec['label']},{xs},{rec['value']:.17g},{rec['kind']}"
        )
    return "\n".join(lines) + "\n"
