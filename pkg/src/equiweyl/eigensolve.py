"""Truncated Laplace eigenbases compatible with the circle / cyclic isotypic
decomposition.

Analytic bases for the round sphere and the flat torus.  For surfaces of
revolution, each Fourier mode m gives a radial Sturm-Liouville problem
  -(1/r)(r u')' + (m^2/r^2) u = lambda u      (weight r ds)
discretized in flux form on cell centers; the substitution w = sqrt(r) u
turns it into a plain symmetric tridiagonal problem (periodic wrap for
closed profiles), solved by Sturm-sequence bisection plus inverse iteration.
The flux form keeps constants exactly harmonic for m = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .errors import (
    ConvergenceError,
    DomainError,
    ResourceLimitError,
    TruncationError,
)
from .geometry import (
    FlatTorus2,
    FlatTorus2FiniteCyclic,
    IsotypicLabel,
    RoundSphere2,
    SurfaceOfRevolution,
)
from .util import format_float


@dataclass(frozen=True)
class EigenMode:
    eigenvalue: float
    mu: float
    label: IsotypicLabel
    evaluator: object  # point -> complex
    source: str  # "analytic" | "discrete(n)"
    quantum: tuple = ()  # (k, m) sphere / (k1, k2) torus / (m, j) discrete

    def density(self, x):
        return abs(self.evaluator(x)) ** 2


@dataclass(frozen=True)
class EigenBasis:
    manifold: object
    modes: tuple
    lambda_max: float
    group_order: int = 0  # 0 for the circle, N for cyclic actions
    grid: tuple = field(default=(), repr=False)  # (s_nodes, profiles) for discrete bases

    def labels(self):
        seen = []
        for mode in self.modes:
            if mode.label not in seen:
                seen.append(mode.label)
        return seen

    def modes_with_label(self, label):
        want = label.m if isinstance(label, IsotypicLabel) else int(label)
        if self.group_order:
            want %= self.group_order
        return [md for md in self.modes if md.label.m == want]

    def require(self, lam):
        if lam > self.lambda_max:
            raise TruncationError(
                f"query at lambda={lam} exceeds basis truncation {self.lambda_max}"
            )


def _sorted_basis(manifold, modes, lambda_max, group_order=0, grid=()):
    modes = tuple(sorted(modes, key=lambda md: (md.eigenvalue, md.label.m, md.quantum)))
    return EigenBasis(manifold, modes, float(lambda_max), group_order, grid)


# ---------------------------------------------------------------------------
# sphere


def _sphere_evaluator(k, m):
    def ev(x):
        x = np.asarray(x, dtype=float)
        theta = math.acos(max(-1.0, min(1.0, x[2])))
        phi = math.atan2(x[1], x[0])
        pbar = specfun.assoc_legendre_normalized(k, m, math.cos(theta))
        return pbar * cmath.exp(1j * m * phi)

    return ev


def sphere_k_max(lambda_max):
    if lambda_max < 0:
        return -1
    k = int((math.sqrt(4.0 * lambda_max + 1.0) - 1.0) / 2.0)
    while (k + 1) * (k + 2) <= lambda_max:
        k += 1
    while k >= 0 and k * (k + 1) > lambda_max:
        k -= 1
    return k


def sphere_basis(lambda_max):
    if lambda_max < 0:
        raise DomainError("lambda_max must be >= 0")
    k_hi = sphere_k_max(lambda_max)
    if k_hi > specfun.DEGREE_LIMIT:
        raise ResourceLimitError(
            f"lambda_max={lambda_max} needs degree {k_hi} > {specfun.DEGREE_LIMIT}"
        )
    modes = []
    for k in range(k_hi + 1):
        lam = float(k * (k + 1))
        for m in range(-k, k + 1):
            modes.append(
                EigenMode(lam, math.sqrt(lam), IsotypicLabel(m), _sphere_evaluator(k, m),
                          "analytic", (k, m))
            )
    return _sorted_basis(RoundSphere2(), modes, lambda_max)


# ---------------------------------------------------------------------------
# flat torus

_TWO_PI = 2.0 * math.pi


def _torus_evaluator(k1, k2):
    def ev(x):
        return cmath.exp(2j * math.pi * (k1 * x[0] + k2 * x[1]))

    return ev


def _parse_group(group):
    if group == "circle":
        return 0
    if isinstance(group, tuple) and group[0] == "cyclic":
        return int(group[1])
    if isinstance(group, str) and group.startswith("cyclic"):
        tail = group[len("cyclic"):].lstrip(" :-")
        if tail.isdigit() and int(tail) >= 1:
            return int(tail)
    raise DomainError(f"group must be 'circle' or ('cyclic', N), got {group!r}")


def torus_basis(lambda_max, group="circle"):
    if lambda_max < 0:
        raise DomainError("lambda_max must be >= 0")
    order = _parse_group(group)
    R2 = lambda_max / (4.0 * math.pi * math.pi)
    R = int(math.floor(math.sqrt(R2))) if R2 >= 0 else -1
    modes = []
    for k1 in range(-R, R + 1):
        rem = R2 - k1 * k1
        if rem < 0:
            continue
        k2_hi = int(math.floor(math.sqrt(rem)))
        while (k2_hi + 1) ** 2 + k1 * k1 <= R2:
            k2_hi += 1
        while k2_hi >= 0 and k2_hi**2 + k1 * k1 > R2:
            k2_hi -= 1
        for k2 in range(-k2_hi, k2_hi + 1):
            lam = 4.0 * math.pi * math.pi * (k1 * k1 + k2 * k2)
            label = IsotypicLabel(k1 % order, modulus=order) if order else IsotypicLabel(k1)
            modes.append(
                EigenMode(lam, math.sqrt(lam), label, _torus_evaluator(k1, k2),
                          "analytic", (k1, k2))
            )
    manifold = FlatTorus2FiniteCyclic(order) if order else FlatTorus2()
    return _sorted_basis(manifold, modes, lambda_max, group_order=order)


# ---------------------------------------------------------------------------
# symmetric (possibly periodic) tridiagonal eigensolver

_PIVMIN_FLOOR = 1e-290


def _sturm_counts(d, off, corner, shifts):
    """Number of eigenvalues < shift for each shift.

    d: diagonal (n,), off: subdiagonal (n-1,), corner: wrap entry A[0,n-1]
    (0 for open chains).  Counts via LDL pivot signs; the periodic case uses
    the bordered factorization, tracking the fill-in column and the Schur
    complement of the last pivot.
    """
    n = len(d)
    shifts = np.asarray(shifts, dtype=float)
    pivmin = max(_PIVMIN_FLOOR, 1e-30 * float(np.max(np.abs(off)) ** 2 + 1.0))
    if corner == 0.0:
        q = d[0] - shifts
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        counts = (q < 0).astype(np.int64)
        osq = off * off
        for i in range(1, n):
            q = (d[i] - shifts) - osq[i - 1] / q
            q = np.where(np.abs(q) < pivmin, -pivmin, q)
            counts += q < 0
        return counts
    # bordered: leading (n-1) x (n-1) block is plain tridiagonal; the border
    # column f has entries corner (row 0) and off[n-2] (row n-2)
    q = d[0] - shifts
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    counts = (q < 0).astype(np.int64)
    ftil = np.full_like(shifts, corner)
    schur = (d[n - 1] - shifts) - ftil * ftil / q
    osq = off * off
    for i in range(1, n - 1):
        l_prev = off[i - 1] / q
        q = (d[i] - shifts) - osq[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        fi = off[n - 2] if i == n - 2 else 0.0
        ftil = fi - l_prev * ftil
        schur = schur - ftil * ftil / q
        counts += q < 0
    counts += schur < 0
    return counts


def _lowest_eigenvalues(d, off, corner, k_want, max_iter=130):
    """Lowest k_want eigenvalues by vectorized Sturm bisection."""
    n = len(d)
    if k_want > n:
        raise ConvergenceError(f"asked for {k_want} eigenvalues of an {n}-point grid")
    rad = np.zeros(n)
    rad[:-1] += np.abs(off)
    rad[1:] += np.abs(off)
    if corner != 0.0:
        rad[0] += abs(corner)
        rad[-1] += abs(corner)
    glo = float(np.min(d - rad)) - 1e-8
    ghi = float(np.max(d + rad)) + 1e-8
    lo = np.full(k_want, glo)
    hi = np.full(k_want, ghi)
    targets = np.arange(1, k_want + 1)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        tol = 1e-11 * (1.0 + np.abs(mid))
        if np.all(width <= tol):
            break
        counts = _sturm_counts(d, off, corner, mid)
        below = counts >= targets  # eigenvalue_j < mid
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    out = 0.5 * (lo + hi)
    if np.any(np.diff(out) < -1e-6 * (1.0 + np.abs(out[:-1]))):
        raise ConvergenceError("bisection produced out-of-order eigenvalues")
    return out


def _thomas_batch(d, off, shifts, rhs):
    """Solve (T - shift) x = rhs for each column; T tridiagonal.

    d (n,), off (n-1,), shifts (K,), rhs (n, K) -> (n, K).  No pivoting;
    tiny pivots are nudged, which inverse iteration tolerates.
    """
    n, K = rhs.shape
    pivmin = max(_PIVMIN_FLOOR, 1e-30 * float(np.max(np.abs(d)) + 1.0))
    c = np.zeros((n - 1, K))
    x = np.array(rhs, dtype=float)
    q = d[0] - shifts
    q = np.where(np.abs(q) < pivmin, pivmin, q)
    c[0] = off[0] / q
    x[0] = x[0] / q
    for i in range(1, n):
        q = (d[i] - shifts) - off[i - 1] * c[i - 1]
        q = np.where(np.abs(q) < pivmin, pivmin, q)
        if i < n - 1:
            c[i] = off[i] / q
        x[i] = (x[i] - off[i - 1] * x[i - 1]) / q
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return x


def _solve_shifted(d, off, corner, shifts, rhs):
    if corner == 0.0:
        return _thomas_batch(d, off, shifts, rhs)
    # block elimination on the bordered form: B y = rhs_head, B z = f,
    # then the last unknown from the Schur complement of the last pivot
    n, K = rhs.shape
    dB, offB = d[: n - 1], off[: n - 2]
    f = np.zeros((n - 1, K))
    f[0] = corner
    f[n - 2] = off[n - 2]
    y = _thomas_batch(dB, offB, shifts, rhs[: n - 1])
    z = _thomas_batch(dB, offB, shifts, f)
    fty = corner * y[0] + off[n - 2] * y[n - 2]
    ftz = corner * z[0] + off[n - 2] * z[n - 2]
    denom = (d[n - 1] - shifts) - ftz
    denom = np.where(np.abs(denom) < _PIVMIN_FLOOR, _PIVMIN_FLOOR, denom)
    x_last = (rhs[n - 1] - fty) / denom
    x = np.empty((n, K))
    x[: n - 1] = y - z * x_last
    x[n - 1] = x_last
    return x


def _apply_tridiag(d, off, corner, w):
    out = d[:, None] * w
    out[:-1] += off[:, None] * w[1:]
    out[1:] += off[:, None] * w[:-1]
    if corner != 0.0:
        out[0] += corner * w[-1]
        out[-1] += corner * w[0]
    return out


def _eigenpairs(d, off, corner, k_want, seed, group_tol_scale=1e-9):
    """Lowest eigenpairs: bisection, then inverse iteration with grouping.

    Near-degenerate eigenvalues (within 1e-9 (1+lambda)) share a subspace;
    iterate one vector per group member with re-orthogonalization so closed
    profiles with exactly double eigenvalues resolve cleanly.
    """
    n = len(d)
    vals = _lowest_eigenvalues(d, off, corner, k_want)
    rng = np.random.default_rng(seed)
    vecs = np.empty((n, k_want))
    i = 0
    while i < k_want:
        j = i + 1
        while j < k_want and vals[j] - vals[j - 1] <= group_tol_scale * (1.0 + abs(vals[j])):
            j += 1
        g = j - i
        shifts = vals[i:j] + 1e-10 * (1.0 + np.abs(vals[i:j])) * (np.arange(g) - (g - 1) / 2.0)
        V = rng.standard_normal((n, g))
        for _ in range(3):
            V = _solve_shifted(d, off, corner, shifts, V)
            # modified Gram-Schmidt keeps the group orthonormal
            for a in range(g):
                for b in range(a):
                    V[:, a] -= (V[:, b] @ V[:, a]) * V[:, b]
                nv = math.sqrt(V[:, a] @ V[:, a])
                if nv == 0.0:
                    raise ConvergenceError("inverse iteration collapsed to zero")
                V[:, a] /= nv
        TV = _apply_tridiag(d, off, corner, V)
        for a in range(g):
            vals[i + a] = float(V[:, a] @ TV[:, a])
            vecs[:, i + a] = V[:, a]
        i = j
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


# ---------------------------------------------------------------------------
# surface-of-revolution basis


def _radial_matrix(profile, m, grid_n):
    """Flux-form discretization of the weighted radial problem.

    Cell centers s_i = (i-1/2)h; after w = sqrt(r) u the matrix is symmetric
    tridiagonal with face coefficients r(s +- h/2).  Open profiles get the
    natural zero-flux ends (the face radius vanishes there), which realizes
    the sqrt(r)-weighted regularity condition; closed profiles wrap.
    """
    n = int(grid_n)
    L = profile.length
    h = L / n
    s = (np.arange(n) + 0.5) * h
    r = np.asarray(profile.r(s), dtype=float)
    if np.any(r <= 0):
        raise DomainError("profile radius must be positive at all cell centers")
    faces = np.asarray(profile.r(np.arange(n + 1) * h), dtype=float)
    if not profile.closed:
        faces[0] = 0.0 if faces[0] < 1e-9 else faces[0]
        faces[-1] = 0.0 if faces[-1] < 1e-9 else faces[-1]
    d = (faces[:-1] + faces[1:]) / (h * h * r) + (m * m) / (r * r)
    off = -faces[1:-1] / (h * h * np.sqrt(r[:-1] * r[1:]))
    corner = 0.0
    if profile.closed:
        corner = -faces[0] / (h * h * math.sqrt(r[0] * r[-1]))
    return s, r, h, d, off, corner


def _sor_evaluator(profile, s_nodes, u, m, h):
    closed = profile.closed
    L = profile.length
    if closed:
        s_ext = np.concatenate(([s_nodes[0] - h], s_nodes, [s_nodes[-1] + h]))
        u_ext = np.concatenate(([u[-1]], u, [u[0]]))
    else:
        left = u[0] if m == 0 else 0.0
        right = u[-1] if m == 0 else 0.0
        s_ext = np.concatenate(([0.0], s_nodes, [L]))
        u_ext = np.concatenate(([left], u, [right]))

    def ev(x):
        s = float(x[0]) % L if closed else float(x[0])
        val = float(np.interp(s, s_ext, u_ext))
        return val * cmath.exp(1j * m * x[1])

    return ev


def surface_of_revolution_basis(profile, m_max, modes_per_m, grid_n):
    if grid_n < 100:
        raise DomainError("grid_n must be >= 100")
    if modes_per_m < 1 or m_max < 0:
        raise DomainError("need modes_per_m >= 1 and m_max >= 0")
    modes = []
    block_tops = []
    s_nodes = None
    for m in range(0, m_max + 2):
        want = 1 if m == m_max + 1 else modes_per_m
        s, r, h, d, off, corner = _radial_matrix(profile, m, grid_n)
        s_nodes = s
        vals, vecs = _eigenpairs(d, off, corner, want, seed=90210 + 13 * m)
        if m == m_max + 1:
            # only needed to certify completeness of the truncation
            block_tops.append(vals[0])
            break
        block_tops.append(vals[want - 1])
        norm = math.sqrt(2.0 * math.pi * h)  # 2 pi h sum w^2 = 1
        for j, lam in enumerate(vals):
            lam = max(lam, 0.0) if lam > -1e-9 else lam
            w = vecs[:, j] / norm
            if w[np.argmax(np.abs(w))] < 0:
                w = -w
            u = w / np.sqrt(r)
            for sgn in ((1,) if m == 0 else (1, -1)):
                ev = _sor_evaluator(profile, s, u, sgn * m, h)
                modes.append(
                    EigenMode(float(lam), math.sqrt(max(lam, 0.0)),
                              IsotypicLabel(sgn * m), ev, f"discrete({grid_n})",
                              (sgn * m, j), )
                )
    lambda_max = float(min(block_tops))
    return _sorted_basis(profile, modes, lambda_max, grid=(tuple(s_nodes),))


# ---------------------------------------------------------------------------
# text export / import


def export_basis(basis, path):
    """One mode per line: eigenvalue, label, radial grid values."""
    if not isinstance(basis.manifold, SurfaceOfRevolution):
        raise DomainError("text export is defined for discrete bases only")
    profile = basis.manifold
    s_nodes = np.asarray(basis.grid[0])
    n = len(s_nodes)
    lines = [
        "# radial eigenbasis, text format v1",
        f"# profile={profile.name} closed={int(profile.closed)} "
        f"length={format_float(profile.length)} grid_n={n} "
        f"lambda_max={format_float(basis.lambda_max)}",
        "# line format: eigenvalue label u(s_1) ... u(s_n); s_i = (i-1/2) length/n",
    ]
    for md in basis.modes:
        m = md.quantum[0]
        u = np.array([md.evaluator((s, 0.0)).real for s in s_nodes])
        vals = " ".join(format_float(v) for v in u)
        lines.append(f"{format_float(md.eigenvalue)} {m} {vals}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def import_basis(path, profile):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    meta = {}
    body = []
    for ln in lines:
        if ln.startswith("#"):
            for tok in ln[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    meta[key] = val
        elif ln.strip():
            body.append(ln)
    n = int(meta["grid_n"])
    h = profile.length / n
    s_nodes = (np.arange(n) + 0.5) * h
    modes = []
    for ln in body:
        toks = ln.split()
        lam = float(toks[0])
        m = int(toks[1])
        u = np.array([float(t) for t in toks[2 : 2 + n]])
        ev = _sor_evaluator(profile, s_nodes, u, m, h)
        modes.append(
            EigenMode(lam, math.sqrt(max(lam, 0.0)), IsotypicLabel(m), ev,
                      f"discrete({n})", (m, len(modes)))
        )
    return _sorted_basis(profile, modes, float(meta["lambda_max"]), grid=(tuple(s_nodes),))
