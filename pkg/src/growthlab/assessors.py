"""Conditional assessment families ``mu_t``.

Every assessor maps a random variable to an ``F_t``-measurable one, cell by
cell. The workhorse method is :meth:`Assessor.cells`, which evaluates a batch
of inputs (rows of a 2-D array in original atom order) and returns one column
per cell of the partition at ``t``. :meth:`Assessor.evaluate` wraps it for a
single :class:`~growthlab.space.RandomVariable`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import bisect

from . import kernels
from .errors import ConfigError, InversionFailure
from .space import FilteredSpace, RandomVariable, cond_expect_cells

INVERSION_XTOL = 1e-10
BRACKET_BUDGET = 200
HAT_NMAX = 60
HAT_TOL = 1e-10


def _as_rows(space: FilteredSpace, x) -> tuple[np.ndarray, tuple]:
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, space.n_atoms), x.shape[:-1]


class Assessor:
    """Base class. Subclasses implement :meth:`_cells` on 2-D input."""

    kind = "assessor"
    cash_additive = False
    bi_lipschitz = False
    satisfies_enough1 = False
    builtin = True

    def cells(self, space: FilteredSpace, t: int, x) -> np.ndarray:
        rows, lead = _as_rows(space, x)
        out = self._cells(space, t, rows)
        return out.reshape(lead + (out.shape[-1],))

    def _cells(self, space: FilteredSpace, t: int, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, t: int, X: RandomVariable) -> RandomVariable:
        cells = self.cells(X.space, t, X.values)
        return RandomVariable(X.space, X.space.broadcast(cells, t))

    def __call__(self, t: int, X: RandomVariable) -> RandomVariable:
        return self.evaluate(t, X)

    @property
    def declared_flags(self) -> dict:
        return {
            "cash_additive": self.cash_additive,
            "bi_lipschitz": self.bi_lipschitz,
            "satisfies_enough1": self.satisfies_enough1,
        }

    def config(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.config()})"


class Entropic(Assessor):
    """Dynamic monetary entropic utility ``(1/gamma) ln E[exp(gamma X) | F_t]``."""

    kind = "entropic"
    cash_additive = True
    satisfies_enough1 = True

    def __init__(self, gamma: float):
        self.gamma = float(gamma)
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")

    def _cells(self, space, t, rows):
        xs = space.to_sorted(rows)
        if self.gamma == 0.0:
            return kernels.seg_mean(xs, space.sorted_weights, space.offsets(t), space.cell_mass(t))
        return kernels.seg_entropic(xs, space.sorted_log_weights, space.offsets(t),
                                    space.log_cell_mass(t), self.gamma)

    def config(self):
        return {"kind": "entropic", "gamma": self.gamma}


# -- utilities and certainty equivalents ---------------------------------------

@dataclass(frozen=True)
class Utility:
    """Strictly increasing utility on the extended line.

    ``forward`` must be vectorised and map ``+-inf`` to its limits. When
    ``inverse`` is None the inverse is found by bisection.
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    lipschitz: tuple[float, float] | None = None
    param: float | None = None

    @property
    def lower(self) -> float:
        return float(self.forward(np.array([-np.inf]))[0])

    @property
    def upper(self) -> float:
        return float(self.forward(np.array([np.inf]))[0])

    @property
    def bi_lipschitz(self) -> bool:
        return self.lipschitz is not None

    def invert(self, y: float, lo: float = -1.0, hi: float = 1.0) -> float:
        """Solve ``forward(z) = y``; ``lo``/``hi`` seed the bracket."""
        if self.inverse is not None:
            return float(self.inverse(np.array([y]))[0])
        if y >= self.upper:
            return math.inf
        if y <= self.lower:
            return -math.inf
        f = lambda z: float(self.forward(np.array([z]))[0]) - y  # noqa: E731
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            lo, hi = -1.0, 1.0
        width = max(hi - lo, 1.0)
        for _ in range(BRACKET_BUDGET):
            flo, fhi = f(lo), f(hi)
            if flo <= 0.0 <= fhi:
                break
            if flo > 0:
                lo -= width
            if fhi < 0:
                hi += width
            width *= 2.0
        else:
            raise InversionFailure(f"{self.name}: no bracket for y={y!r}")
        if f(lo) == 0.0:
            return lo
        if f(hi) == 0.0:
            return hi
        return bisect(f, lo, hi, xtol=INVERSION_XTOL, maxiter=2000)

    def config(self) -> dict:
        out = {"utility": self.name}
        if self.param is not None:
            out["param"] = self.param
        return out


def identity_utility() -> Utility:
    return Utility("identity", lambda x: np.asarray(x, dtype=float), lambda y: np.asarray(y, dtype=float), (1.0, 1.0))


def exponential_utility(gamma: float) -> Utility:
    """``sign(gamma) exp(gamma x)``; its certainty equivalent is the entropic utility."""
    g = float(gamma)
    if g == 0.0:
        u = identity_utility()
        return Utility("exponential", u.forward, u.inverse, u.lipschitz, 0.0)
    sgn = math.copysign(1.0, g)

    def fwd(x):
        with np.errstate(over="ignore"):
            return sgn * np.exp(g * np.asarray(x, dtype=float))

    def inv(y):
        with np.errstate(divide="ignore"):
            return np.log(sgn * np.asarray(y, dtype=float)) / g

    return Utility("exponential", fwd, inv, None, g)


def power_utility(p: float) -> Utility:
    """Odd power ``sign(x)|x|^p``; continuous and increasing but not bi-Lipschitz for p != 1."""
    p = float(p)
    if p <= 0:
        raise ValueError("power utility needs p > 0")

    def fwd(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.abs(x) ** p

    def inv(y):
        y = np.asarray(y, dtype=float)
        return np.sign(y) * np.abs(y) ** (1.0 / p)

    return Utility("power", fwd, inv, (1.0, 1.0) if p == 1.0 else None, p)


def tanh_utility() -> Utility:
    """``x + tanh(x)``: bi-Lipschitz (constants 2 and 1) with no closed-form inverse."""
    def fwd(x):
        x = np.asarray(x, dtype=float)
        return x + np.tanh(x)

    return Utility("tanh", fwd, None, (2.0, 1.0))


UTILITIES: dict[str, Callable[..., Utility]] = {
    "identity": lambda param=None: identity_utility(),
    "exponential": lambda param=1.0: exponential_utility(param),
    "power": lambda param=0.5: power_utility(param),
    "tanh": lambda param=None: tanh_utility(),
}


class CertaintyEquivalent(Assessor):
    """``U^{-1}(E[U(X) | F_t])``."""

    kind = "ce"

    def __init__(self, utility: Utility):
        self.utility = utility
        self.bi_lipschitz = utility.bi_lipschitz
        self.cash_additive = utility.name in ("identity", "exponential")
        self.satisfies_enough1 = self.cash_additive or self.bi_lipschitz

    def _cells(self, space, t, rows):
        u = self.utility.forward(rows)
        ecell = cond_expect_cells(space, t, u)
        if self.utility.inverse is not None:
            with np.errstate(invalid="ignore"):
                return np.asarray(self.utility.inverse(ecell), dtype=float)
        xs = space.to_sorted(np.where(np.isfinite(rows), rows, np.nan))
        off = space.offsets(t)
        out = np.empty_like(ecell)
        for r in range(ecell.shape[0]):
            for c in range(ecell.shape[1]):
                seg = xs[r, off[c]:off[c + 1]]
                fin = seg[~np.isnan(seg)]
                lo, hi = (fin.min(), fin.max()) if fin.size else (-1.0, 1.0)
                out[r, c] = self.utility.invert(ecell[r, c], lo, hi)
        return out

    def config(self):
        return {"kind": "ce", **self.utility.config()}


# -- negative average value at risk -----------------------------------------

class NegAVaR(Assessor):
    """``-AV@R_alpha``: mean of the lowest ``alpha`` probability mass of each cell.

    Uses the lower quantile with the boundary atom weighted fractionally, which
    makes it exact on finite spaces.
    """

    kind = "neg_avar"
    cash_additive = True
    satisfies_enough1 = True

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.alpha = alpha

    def _cells(self, space, t, rows):
        xs = space.to_sorted(rows)
        w = space.sorted_weights
        off = space.offsets(t)
        mass = space.cell_mass(t)
        out = np.empty((xs.shape[0], off.size - 1))
        for c in range(off.size - 1):
            block = xs[:, off[c]:off[c + 1]]
            idx = np.argsort(block, axis=1, kind="stable")
            vals = np.take_along_axis(block, idx, axis=1)
            ws = (w[off[c]:off[c + 1]] / mass[c])[idx]
            before = np.cumsum(ws, axis=1) - ws
            take = np.clip(self.alpha - before, 0.0, ws)
            used = take > 0
            ninf = np.any(used & (vals == -np.inf), axis=1)
            pinf = np.any(used & (vals == np.inf), axis=1)
            fin = np.where(used & np.isfinite(vals), vals, 0.0)
            res = np.sum(take * fin, axis=1) / self.alpha
            res = np.where(pinf, np.inf, res)
            out[:, c] = np.where(ninf, -np.inf, res)
        return out

    def config(self):
        return {"kind": "neg_avar", "alpha": self.alpha}


# -- wrappers -----------------------------------------------------------------

class RiskSeeking(Assessor):
    """Evaluates ``base`` at ``X+ = max(X, 0)``: losses are replaced by zero."""

    kind = "risk_seeking"

    def __init__(self, base: Assessor):
        self.base = base
        self.satisfies_enough1 = base.cash_additive
        self.builtin = base.builtin

    def _cells(self, space, t, rows):
        return self.base._cells(space, t, np.maximum(rows, 0.0))

    def config(self):
        return {"kind": "risk_seeking", "base": self.base.config()}


class CellFunctional(Assessor):
    """Assessor defined by a per-cell function ``fn(values, probs) -> float``.

    Used for maps that are local by construction but are not one of the
    built-in families, e.g. ``esssup + essinf``.
    """

    kind = "functional"
    builtin = False

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], float], name: str = "functional"):
        self.fn = fn
        self.name = name

    def _cells(self, space, t, rows):
        xs = space.to_sorted(rows)
        w = space.sorted_weights
        off = space.offsets(t)
        out = np.empty((xs.shape[0], off.size - 1))
        for r in range(xs.shape[0]):
            for c in range(off.size - 1):
                out[r, c] = self.fn(xs[r, off[c]:off[c + 1]], w[off[c]:off[c + 1]])
        return out

    def config(self):
        return {"kind": "functional", "name": self.name}


def esssup_plus_essinf() -> CellFunctional:
    """``f(X) = esssup X + essinf X`` per cell: monotone, local, lacks the Fatou property."""
    from .extreal import ext_add

    return CellFunctional(lambda v, w: ext_add(float(v.max()), float(v.min())), "esssup_plus_essinf")


@dataclass(frozen=True)
class HatResult:
    value: RandomVariable
    converged: np.ndarray
    direct: bool


def hat_schedule(n_max: int = HAT_NMAX) -> np.ndarray:
    return 2.0 ** np.arange(n_max + 1)


def _hat_sequence(base: Assessor, space, t, x, n_max):
    levels = hat_schedule(n_max)
    rows = np.maximum(x[None, :], -levels[:, None])
    return base.cells(space, t, rows)


def hat_eval(base: Assessor, t: int, X: RandomVariable, n_max: int = HAT_NMAX, tol: float = HAT_TOL) -> HatResult:
    """Extension of ``base`` to ``-inf``-valued inputs: liminf of ``base(X v -n)``.

    Built-in assessors on inputs without ``+inf`` entries are evaluated
    directly with the extended-real conventions; the truncation sequence is
    still computed and the direct value is checked against it on every cell
    where it is finite.
    """
    space = X.space
    x = X.values
    seq = _hat_sequence(base, space, t, x, n_max)
    if base.builtin and not np.any(x == np.inf):
        direct = base.cells(space, t, x)
        fin = np.isfinite(direct)
        last = seq[-1]
        scale = np.maximum(1.0, np.abs(np.where(fin, direct, 0.0)))
        if not np.all(np.abs(np.where(fin, last - direct, 0.0)) <= tol * scale):
            raise AssertionError("direct evaluation disagrees with truncation limit")
        ninf = direct == -np.inf
        if np.any(ninf) and not np.all(np.diff(seq[:, ninf], axis=0) <= tol):
            raise AssertionError("truncation sequence does not decrease on -inf cells")
        return HatResult(RandomVariable(space, space.broadcast(direct, t)), np.ones(direct.shape, bool), True)
    a, b = seq[-1], seq[-2] if len(seq) > 1 else seq[-1]
    with np.errstate(invalid="ignore"):
        converged = (a == b) | (np.isfinite(a) & np.isfinite(b) & (np.abs(a - b) <= tol))
    tail = seq[len(seq) // 2:]
    value = np.where(converged, a, tail.min(axis=0))
    return HatResult(RandomVariable(space, space.broadcast(value, t)), converged, False)


class Hat(Assessor):
    kind = "hat"

    def __init__(self, base: Assessor, n_max: int = HAT_NMAX, tol: float = HAT_TOL):
        self.base = base
        self.n_max = n_max
        self.tol = tol
        self.cash_additive = base.cash_additive
        self.satisfies_enough1 = base.satisfies_enough1
        self.builtin = base.builtin

    def _cells(self, space, t, rows):
        out = []
        for r in rows:
            res = hat_eval(self.base, t, RandomVariable(space, r), self.n_max, self.tol)
            out.append(res.value.cell_values(t))
        return np.array(out)

    def config(self):
        return {"kind": "hat", "base": self.base.config()}


# -- functional API -----------------------------------------------------------

def entropic_eval(gamma: float, t: int, X: RandomVariable) -> RandomVariable:
    return Entropic(gamma).evaluate(t, X)


def certainty_equiv_eval(utility: Utility, t: int, X: RandomVariable) -> RandomVariable:
    return CertaintyEquivalent(utility).evaluate(t, X)


def neg_avar_eval(alpha: float, t: int, X: RandomVariable) -> RandomVariable:
    return NegAVaR(alpha).evaluate(t, X)


def risk_seeking_wrap(base: Assessor) -> RiskSeeking:
    return RiskSeeking(base)


def assessor_from_config(cfg: dict | str) -> Assessor:
    """Build an assessor from a config fragment or a short ``kind:param`` string."""
    if isinstance(cfg, str):
        cfg = parse_assessor_spec(cfg)
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError(f"assessor config needs a 'kind': {cfg!r}")
    kind = cfg["kind"]
    try:
        if kind == "entropic":
            return Entropic(float(cfg["gamma"]))
        if kind == "neg_avar":
            return NegAVaR(float(cfg["alpha"]))
        if kind == "ce":
            name = cfg.get("utility", "identity")
            if name not in UTILITIES:
                raise ConfigError(f"unknown utility {name!r}")
            args = () if cfg.get("param") is None else (float(cfg["param"]),)
            return CertaintyEquivalent(UTILITIES[name](*args))
        if kind == "risk_seeking":
            return RiskSeeking(assessor_from_config(cfg["base"]))
        if kind == "hat":
            return Hat(assessor_from_config(cfg["base"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad assessor config {cfg!r}: {exc}") from exc
    raise ConfigError(f"unknown assessor kind {kind!r}")


def parse_assessor_spec(text: str) -> dict:
    """``entropic:-1``, ``neg_avar:0.5``, ``ce:power:0.5``, ``risk_seeking:entropic:1`` or JSON."""
    import json

    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad assessor JSON: {exc}") from exc
    head, _, rest = text.partition(":")
    if head in ("risk_seeking", "hat"):
        return {"kind": head, "base": parse_assessor_spec(rest)}
    if head == "entropic":
        return {"kind": "entropic", "gamma": rest or "0"}
    if head == "neg_avar":
        return {"kind": "neg_avar", "alpha": rest}
    if head == "ce":
        name, _, param = rest.partition(":")
        out = {"kind": "ce", "utility": name or "identity"}
        if param:
            out["param"] = param
        return out
    raise ConfigError(f"cannot parse assessor spec {text!r}")
