"""Extended-real arithmetic.

Extended reals are plain floats (and float64 arrays) with ``-inf``/``+inf``
for the infinities. NaN never appears in a valid value. The arithmetic
follows two conventions:

* ``inf - inf = -inf`` (a sum with both infinities is ``-inf``)
* ``0 * (+-inf) = 0``
"""

from __future__ import annotations

import math

import numpy as np

NEG_INF = -math.inf
POS_INF = math.inf


def _scalar_or_array(result, a, b=None):
    if np.ndim(a) == 0 and (b is None or np.ndim(b) == 0):
        return float(result)
    return result


def ext_add(a, b):
    with np.errstate(invalid="ignore"):
        r = np.add(a, b, dtype=float)
    r = np.where(np.isnan(r), NEG_INF, r)
    return _scalar_or_array(r, a, b)


def ext_sub(a, b):
    return ext_add(a, np.negative(b, dtype=float))


def ext_mul(a, b):
    with np.errstate(invalid="ignore"):
        r = np.multiply(a, b, dtype=float)
    zero = (np.asarray(a) == 0) | (np.asarray(b) == 0)
    r = np.where(zero, 0.0, r)
    return _scalar_or_array(r, a, b)


def ext_arith(a, b, op: str):
    """Total binary operation on extended reals; ``op`` is ``"add"`` or ``"mul"``."""
    if op == "add":
        return ext_add(a, b)
    if op == "mul":
        return ext_mul(a, b)
    raise ValueError(f"unknown op {op!r}")


def ext_exp(x):
    return _scalar_or_array(np.exp(np.asarray(x, dtype=float)), x)


def ext_log(x):
    """Natural log on ``[0, inf]`` with ``ln 0 = -inf``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("ext_log is defined on [0, inf] only")
    with np.errstate(divide="ignore"):
        r = np.log(arr)
    return _scalar_or_array(r, x)


def ext_eq(a, b) -> np.ndarray:
    """Elementwise equality where equal infinities compare equal."""
    return np.asarray(a) == np.asarray(b)


def check_ext(x) -> None:
    if np.any(np.isnan(np.asarray(x, dtype=float))):
        raise ValueError("NaN is not an extended real")


def parse_ext(v) -> float:
    """Read an extended real from JSON-ish input ("inf"/"-inf" strings allowed)."""
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return POS_INF
        if s in ("-inf", "-infinity"):
            return NEG_INF
        v = float(s)
    v = float(v)
    if math.isnan(v):
        raise ValueError("NaN is not an extended real")
    return v


def format_ext(x: float):
    """JSON-safe form: infinities become "inf"/"-inf" strings."""
    x = float(x)
    if x == POS_INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return x
