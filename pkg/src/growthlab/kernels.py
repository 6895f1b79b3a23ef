"""Backend selection for the segmented reduction kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded. Set ``GROWTHLAB_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_impl = _kernels_py
if os.environ.get("GROWTHLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND


def _prep(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return x.reshape(1, -1) if x.ndim == 1 else x


def seg_mean(x, w, offsets, mass, impl=None):
    return (impl or _impl).seg_mean(_prep(x), w, offsets, mass)


def seg_entropic(x, logw, offsets, logmass, gamma, impl=None):
    return (impl or _impl).seg_entropic(_prep(x), logw, offsets, logmass, float(gamma))


def seg_min(x, offsets, impl=None):
    return (impl or _impl).seg_min(_prep(x), offsets)


def seg_max(x, offsets, impl=None):
    return (impl or _impl).seg_max(_prep(x), offsets)


def available_backends() -> dict:
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
