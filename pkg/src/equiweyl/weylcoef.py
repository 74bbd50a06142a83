"""Predicted leading coefficients of the reduced local and global Weyl laws.

The local coefficient at x is a quadrature over the unit-ball slice of the
annihilator fiber, weighting each node by the reciprocal lifted-orbit volume:

    coefficient = d_gamma [pi|G_x : 1] / (2 pi)^(n - kappa_x)
                  * sum_i w_i / vol(lifted orbit through (x, xi_i))

and multiplies lambda^((n - kappa_x)/opDegree).  The global coefficient is
the x-integral of local coefficients over the principal stratum (quadrature
nodes never land on singular orbits).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IntegrabilityWarning, StratumContributionWarning
from .geometry import (
    FlatTorus2,
    FlatTorus2FiniteCyclic,
    IsotypicLabel,
    RoundSphere2,
    SurfaceOfRevolution,
    cosphere_fiber_slice,
    lifted_orbit_volume,
    orbit_data,
    sphere_point,
)
from .util import gauss_nodes, pairwise_sum


@dataclass(frozen=True)
class WeylPrediction:
    coefficient: float
    exponent: float
    x: tuple
    label: IsotypicLabel
    n_nodes: int

    def json_fragment(self):
        return {
            "x": list(self.x),
            "label": self.label.m,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "n_nodes": self.n_nodes,
        }

    def evaluate(self, lam):
        return self.coefficient * lam**self.exponent


def _as_label(label):
    return label if isinstance(label, IsotypicLabel) else IsotypicLabel(int(label))


def local_leading_coefficient(manifold, x, label, n_nodes=64):
    if n_nodes < 8:
        raise DomainError("n_nodes must be >= 8")
    label = _as_label(label)
    od = orbit_data(manifold, x)
    n = manifold.dim
    kappa = od.kappa_x
    exponent = (n - kappa) / manifold.operator_degree
    mult = od.trivial_multiplicity(label)
    x_t = tuple(np.asarray(x, dtype=float))
    if mult == 0.0:
        return WeylPrediction(0.0, exponent, x_t, label, n_nodes)
    if kappa == 0 and od.isotropy == "full group":
        warnings.warn(
            "reciprocal orbit volume is singular at the zero covector; "
            "polar nodes avoid it and the integrand stays integrable",
            IntegrabilityWarning,
        )
    nodes = cosphere_fiber_slice(manifold, x, n_nodes)
    vals = np.array([pt.weight / lifted_orbit_volume(manifold, pt) for pt in nodes])
    total = float(pairwise_sum(vals))
    coeff = label.d_gamma * mult / (2.0 * math.pi) ** (n - kappa) * total
    return WeylPrediction(coeff, exponent, x_t, label, n_nodes)


def equator_coefficient_closed_form(theta):
    """Reference value of the sphere local coefficient at colatitude theta.

    Closed form of the fiber integral with the embedded lifted-orbit length
    2 pi sqrt(sin^2 theta + c^2 cos^2 theta); reduces to 1/(2 pi^2) on the
    equator.
    """
    if not 0 < theta <= math.pi / 2:
        raise DomainError("theta must lie in (0, pi/2]")
    c = math.cos(theta)
    if c < 1e-12:
        return 1.0 / (2.0 * math.pi**2)
    return math.asinh(c / math.sin(theta)) / (2.0 * math.pi**2 * c)


def _sphere_global(label, n_x_nodes, n_fiber_nodes):
    man = RoundSphere2()
    alpha, w = gauss_nodes(int(n_x_nodes))

    def integral(a_nodes, a_w):
        vals = []
        for a in a_nodes:
            theta = math.acos(float(a))
            pred = local_leading_coefficient(man, sphere_point(theta), label, n_fiber_nodes)
            vals.append(pred.coefficient)
        return 2.0 * math.pi * float(pairwise_sum(np.asarray(vals) * a_w))

    total = integral(alpha, w)
    a2, w2 = gauss_nodes(2 * int(n_x_nodes))
    refined = integral(a2, w2)
    if abs(refined - total) > 1e-3 * max(abs(refined), 1e-300):
        warnings.warn(
            "x-quadrature shift above 0.1% under refinement; singular-orbit "
            "neighborhoods may be under-resolved",
            StratumContributionWarning,
        )
    return refined


def _torus_global(manifold, label, n_x_nodes, n_fiber_nodes):
    # the local coefficient does not depend on x; integrate literally anyway
    grid = (np.arange(n_x_nodes) + 0.5) / n_x_nodes
    vals = []
    for x1 in grid:
        for x2 in grid:
            pred = local_leading_coefficient(manifold, [x1, x2], label, n_fiber_nodes)
            vals.append(pred.coefficient)
    return float(pairwise_sum(np.array(vals))) / (n_x_nodes * n_x_nodes)


def _sor_global(profile, label, n_x_nodes, n_fiber_nodes):
    t, w = gauss_nodes(int(n_x_nodes))
    s_nodes = 0.5 * (t + 1.0) * profile.length
    w_s = 0.5 * profile.length * w
    vals = []
    for s, ws in zip(s_nodes, w_s):
        pred = local_leading_coefficient(profile, [s, 0.0], label, n_fiber_nodes)
        r = float(profile.r(s))
        vals.append(2.0 * math.pi * r * ws * pred.coefficient)
    return float(pairwise_sum(np.array(vals)))


def global_leading_coefficient(manifold, label, n_x_nodes=64, n_fiber_nodes=64):
    label = _as_label(label)
    if isinstance(manifold, RoundSphere2):
        return _sphere_global(label, n_x_nodes, n_fiber_nodes)
    if isinstance(manifold, (FlatTorus2, FlatTorus2FiniteCyclic)):
        return _torus_global(manifold, label, n_x_nodes, n_fiber_nodes)
    if isinstance(manifold, SurfaceOfRevolution):
        return _sor_global(manifold, label, n_x_nodes, n_fiber_nodes)
    raise DomainError(f"unsupported manifold {manifold!r}")
