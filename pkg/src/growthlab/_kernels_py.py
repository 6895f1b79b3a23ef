"""Pure-numpy segmented reductions (fallback for the compiled kernels).

All functions take values already permuted into segment order: a 2-D array
``x`` of shape ``(rows, n_atoms)`` and ``offsets`` of length ``n_cells + 1``
delimiting contiguous cells. They return ``(rows, n_cells)`` arrays.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def seg_mean(x, w, offsets, mass):
    """Weighted cell mean with the ``inf - inf = -inf`` convention."""
    x = np.asarray(x, dtype=float)
    starts = np.asarray(offsets[:-1], dtype=np.intp)
    ninf = np.logical_or.reduceat(x == -np.inf, starts, axis=1)
    pinf = np.logical_or.reduceat(x == np.inf, starts, axis=1)
    finite = np.where(np.isfinite(x), x, 0.0)
    out = np.add.reduceat(finite * w, starts, axis=1) / mass
    out = np.where(pinf, np.inf, out)
    return np.where(ninf, -np.inf, out)


def seg_entropic(x, logw, offsets, logmass, gamma):
    """``(1/gamma) * ln E[exp(gamma x) | cell]`` via a per-cell log-sum-exp."""
    x = np.asarray(x, dtype=float)
    starts = np.asarray(offsets[:-1], dtype=np.intp)
    a = logw + gamma * x
    m = np.maximum.reduceat(a, starts, axis=1)
    sizes = np.diff(offsets)
    mb = np.repeat(m, sizes, axis=1)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        shifted = np.where(np.isfinite(mb), a - mb, -np.inf)
        s = np.add.reduceat(np.exp(shifted), starts, axis=1)
        lse = np.where(np.isfinite(m), m + np.log(s) - logmass, m)
        return lse / gamma


def seg_min(x, offsets):
    return np.minimum.reduceat(np.asarray(x, dtype=float), np.asarray(offsets[:-1], dtype=np.intp), axis=1)


def seg_max(x, offsets):
    return np.maximum.reduceat(np.asarray(x, dtype=float), np.asarray(offsets[:-1], dtype=np.intp), axis=1)
