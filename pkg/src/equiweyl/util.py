"""Shared numeric plumbing: deterministic reductions, grids, atomic reports."""

from __future__ import annotations

import functools
import math
import os
import tempfile

import numpy as np

_PANEL = 16


@functools.lru_cache(maxsize=128)
def gauss_nodes(n):
    """Gauss rule on [-1, 1] with at least n nodes.

    Single Gauss-Legendre rule up to 600 nodes; beyond that the companion
    eigensolve behind leggauss is cubic in n, so switch to composite
    16-point panels (node count rounds up to a multiple of 16).  Callers
    must use the returned arrays' length, not n.
    """
    if n <= 600:
        x, w = np.polynomial.legendre.leggauss(int(n))
    else:
        panels = -(-int(n) // _PANEL)
        xp, wp = np.polynomial.legendre.leggauss(_PANEL)
        edges = np.linspace(-1.0, 1.0, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + half[:, None] * xp[None, :]).ravel()
        w = (half[:, None] * wp[None, :]).ravel()
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def pairwise_sum(values):
    """Sum in a fixed adjacent-pairing tree order.

    The reduction order depends only on the input order, never on thread
    count or chunking, so reports built from it are bit-reproducible.
    """
    a = np.asarray(values, dtype=np.result_type(np.asarray(values), np.float64))
    a = a.reshape(-1)
    if a.size == 0:
        return a.dtype.type(0)
    while a.size > 1:
        m = (a.size // 2) * 2
        head = a[0:m:2] + a[1:m:2]
        a = np.concatenate([head, a[m:]]) if a.size > m else head
    return a[0]


def geometric_grid(lo, hi, ratio=math.sqrt(2.0)):
    """Geometric grid lo*ratio^j capped at hi; hi appended if not reached."""
    if not (lo > 0 and hi > lo and ratio > 1):
        raise ValueError("need 0 < lo < hi and ratio > 1")
    n = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9))
    pts = [lo * ratio**j for j in range(n + 1)]
    if pts[-1] < hi * (1 - 1e-12):
        pts.append(hi)
    return np.array(pts)


def get_thread_count(explicit=None):
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("EQUIWEYL_THREADS")
    if env:
        return max(1, int(env))
    return 1


def format_float(x):
    """17 significant digits, the package-wide numeric text format."""
    return f"{float(x):.17g}"


def _json_scalar(x):
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError("non-finite float in report")
        return format_float(x)
    if isinstance(x, str):
        import json

        return json.dumps(x)
    raise TypeError(f"unsupported report value {type(x)!r}")


def json_dumps(obj, indent=0):
    """Deterministic JSON with floats at 17 significant digits."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{_json_scalar(str(k))}: {json_dumps(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        parts = [f"{inner}{json_dumps(v, indent + 2)}" for v in seq]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _json_scalar(obj)


def atomic_write_text(path, text):
    """Write via temp file + rename so readers never see partial output."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for c in row:
            if isinstance(c, str):
                cells.append(c)
            elif isinstance(c, (int, np.integer)):
                cells.append(str(int(c)))
            else:
                cells.append(format_float(c))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
