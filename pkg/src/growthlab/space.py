"""Finite filtered probability spaces and random variables on them.

A :class:`FilteredSpace` is a finite set of atoms with strictly positive
probabilities and a refining sequence of partitions ``F_0 .. F_D``. For
``t > D`` the partition at ``D`` is used.

Internally atoms are also kept in one canonical permutation under which every
cell of every partition is a contiguous block; the segmented kernels operate
on that layout. Cell ids at each level are the block order in that layout,
so for :func:`dyadic_space` cell ``i`` (0-based) is the ``i``-th interval
from the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import BadProbabilities, HorizonError, InvalidSpace, NonRefining, NonTrivialRoot, NotMeasurable
from .extreal import ext_add, ext_mul

PROB_TOL = 1e-12


class FilteredSpace:
    """Validated finite filtered probability space (immutable)."""

    def __init__(self, probs, labels: Sequence[np.ndarray], ids: Sequence[Hashable] | None = None):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidSpace("need a nonempty 1-D probability vector")
        if np.any(~np.isfinite(probs)) or np.any(probs <= 0):
            raise BadProbabilities("atom probabilities must be strictly positive")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise BadProbabilities(f"probabilities sum to {probs.sum()!r}, not 1")
        if len(labels) == 0:
            raise InvalidSpace("need at least the t=0 partition")
        n = probs.size
        raw = [np.asarray(lab, dtype=np.int64) for lab in labels]
        for lab in raw:
            if lab.shape != (n,):
                raise InvalidSpace("every partition must label every atom")
        if np.unique(raw[0]).size != 1:
            raise NonTrivialRoot("partition at t=0 must be the single-cell partition")
        for t in range(1, len(raw)):
            # each cell at t must sit inside exactly one cell at t-1
            pairs = np.unique(np.stack([raw[t], raw[t - 1]]), axis=1)
            if np.unique(pairs[0]).size != pairs.shape[1]:
                raise NonRefining(f"partition at t={t} does not refine partition at t={t - 1}")

        order = np.lexsort(tuple(reversed(raw))) if len(raw) > 1 else np.arange(n)
        self.n_atoms = n
        self.depth = len(raw) - 1
        self.ids = list(ids) if ids is not None else list(range(n))
        if len(self.ids) != n or len(set(self.ids)) != n:
            raise InvalidSpace("atom ids must be unique, one per atom")
        self.probs = probs
        self.order = order
        self.inverse_order = np.argsort(order)
        self._w = np.ascontiguousarray(probs[order])
        self._logw = np.log(self._w)
        self._labels: list[np.ndarray] = []
        self._offsets: list[np.ndarray] = []
        self._mass: list[np.ndarray] = []
        self._logmass: list[np.ndarray] = []
        for lab in raw:
            s = lab[order]
            starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
            offsets = np.r_[starts, n].astype(np.int64)
            canon_sorted = np.repeat(np.arange(starts.size), np.diff(offsets))
            canon = np.empty(n, dtype=np.int64)
            canon[order] = canon_sorted
            mass = np.add.reduceat(self._w, starts)
            self._labels.append(canon)
            self._offsets.append(offsets)
            self._mass.append(mass)
            self._logmass.append(np.log(mass))
        for arr in (self.probs, self.order, self._w, self._logw, *self._labels, *self._offsets):
            arr.flags.writeable = False

    # -- structure -------------------------------------------------------
    def level(self, t: int) -> int:
        if t < 0:
            raise ValueError("time must be nonnegative")
        return min(int(t), self.depth)

    def labels(self, t: int) -> np.ndarray:
        """Cell id of every atom (original atom order) at time ``t``."""
        return self._labels[self.level(t)]

    def offsets(self, t: int) -> np.ndarray:
        return self._offsets[self.level(t)]

    def n_cells(self, t: int) -> int:
        return self._offsets[self.level(t)].size - 1

    def cells(self, t: int) -> list[np.ndarray]:
        """Atom indices (original order) of every cell at time ``t``."""
        off = self.offsets(t)
        return [np.sort(self.order[off[i]:off[i + 1]]) for i in range(off.size - 1)]

    def cell_mass(self, t: int) -> np.ndarray:
        return self._mass[self.level(t)]

    def log_cell_mass(self, t: int) -> np.ndarray:
        return self._logmass[self.level(t)]

    @property
    def sorted_weights(self) -> np.ndarray:
        return self._w

    @property
    def sorted_log_weights(self) -> np.ndarray:
        return self._logw

    def to_sorted(self, x) -> np.ndarray:
        """Permute the last axis of ``x`` into segment layout."""
        return np.ascontiguousarray(np.asarray(x, dtype=float)[..., self.order])

    def broadcast(self, cell_values, t: int) -> np.ndarray:
        """Expand per-cell values at time ``t`` to per-atom values."""
        return np.asarray(cell_values, dtype=float)[..., self.labels(t)]

    def __repr__(self) -> str:
        return f"FilteredSpace(n_atoms={self.n_atoms}, depth={self.depth})"


@dataclass(frozen=True, eq=False)
class RandomVariable:
    """Extended-real vector over the atoms of a space (original atom order)."""

    space: FilteredSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.space.n_atoms,):
            raise ValueError(f"expected {self.space.n_atoms} values, got shape {v.shape}")
        if np.any(np.isnan(v)):
            raise ValueError("NaN is not an extended real")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, space: FilteredSpace, c: float) -> "RandomVariable":
        return cls(space, np.full(space.n_atoms, float(c)))

    def _other(self, other):
        return other.values if isinstance(other, RandomVariable) else other

    def __add__(self, other):
        return RandomVariable(self.space, ext_add(self.values, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVariable(self.space, ext_add(self.values, -np.asarray(self._other(other), dtype=float)))

    def __mul__(self, other):
        return RandomVariable(self.space, ext_mul(self.values, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(self.space, -self.values)

    def positive_part(self) -> "RandomVariable":
        return RandomVariable(self.space, np.maximum(self.values, 0.0))

    def maximum(self, c) -> "RandomVariable":
        return RandomVariable(self.space, np.maximum(self.values, self._other(c)))

    def __le__(self, other) -> bool:
        return bool(np.all(self.values <= self._other(other)))

    def __ge__(self, other) -> bool:
        return bool(np.all(self.values >= self._other(other)))

    def equals(self, other) -> bool:
        return bool(np.array_equal(self.values, self._other(other)))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        a, b = self.values, np.asarray(self._other(other), dtype=float)
        same_inf = (a == b) | (np.isfinite(a) & np.isfinite(b) & (np.abs(a - b) <= atol))
        return bool(np.all(same_inf))

    def cell_values(self, t: int) -> np.ndarray:
        """Per-cell values; only meaningful when measurable at ``t``."""
        return self.values[self.space.order][self.space.offsets(t)[:-1]]

    def __len__(self) -> int:
        return self.space.n_atoms


# -- construction ------------------------------------------------------------

def build_space(atoms: Sequence[tuple[Hashable, float]], partitions: Sequence[Sequence[Iterable[Hashable]]]) -> FilteredSpace:
    """Build a space from ``(id, probability)`` pairs and per-time lists of cells."""
    if not atoms:
        raise InvalidSpace("atom list is empty")
    ids = [a for a, _ in atoms]
    index = {a: i for i, a in enumerate(ids)}
    if len(index) != len(ids):
        raise InvalidSpace("duplicate atom ids")
    probs = [float(p) for _, p in atoms]
    labels = []
    for t, part in enumerate(partitions):
        lab = np.full(len(ids), -1, dtype=np.int64)
        for c, cell in enumerate(part):
            cell = list(cell)
            if not cell:
                raise InvalidSpace(f"empty cell in partition at t={t}")
            for a in cell:
                if a not in index:
                    raise InvalidSpace(f"unknown atom id {a!r} at t={t}")
                if lab[index[a]] != -1:
                    raise InvalidSpace(f"atom {a!r} appears twice in partition at t={t}")
                lab[index[a]] = c
        if np.any(lab < 0):
            raise InvalidSpace(f"partition at t={t} does not cover every atom")
        labels.append(lab)
    if not labels:
        labels = [np.zeros(len(ids), dtype=np.int64)]
    return FilteredSpace(probs, labels, ids)


def dyadic_space(depth: int) -> FilteredSpace:
    """Uniform space on ``2**depth`` dyadic intervals of [0, 1] with the dyadic filtration."""
    if depth < 1:
        raise ValueError("dyadic depth must be >= 1")
    n = 1 << depth
    j = np.arange(n, dtype=np.int64)
    labels = [j >> (depth - t) for t in range(depth + 1)]
    return FilteredSpace(np.full(n, 1.0 / n), labels)


def dyadic_midpoints(depth: int) -> np.ndarray:
    n = 1 << depth
    return (np.arange(n) + 0.5) / n


def grid_space(n: int) -> FilteredSpace:
    """``n`` equal atoms of [0, 1] with trivial ``F_0`` and ``F_1`` = all atoms."""
    if n < 2:
        raise ValueError("grid needs at least 2 atoms")
    return FilteredSpace(np.full(n, 1.0 / n), [np.zeros(n, dtype=np.int64), np.arange(n, dtype=np.int64)])


def geometric_grid_space(k: int) -> FilteredSpace:
    """Atoms ``[e^-(j+1), e^-j)`` for ``j < k`` plus ``[0, e^-k)``; ``F_1`` = all atoms.

    Atom ``j`` (``j < k``) has probability ``e^-j - e^-(j+1)`` and the last atom
    ``e^-k``, so ``[0, e^-T]`` is exactly a union of atoms for ``T <= k``.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    j = np.arange(k, dtype=float)
    probs = np.r_[-np.expm1(-1.0) * np.exp(-j), np.exp(-float(k))]
    probs = probs / probs.sum()
    n = k + 1
    return FilteredSpace(probs, [np.zeros(n, dtype=np.int64), np.arange(n, dtype=np.int64)])


# -- operations --------------------------------------------------------------

def is_measurable(X: RandomVariable, t: int) -> bool:
    """True iff ``X`` is constant (exact equality) on every cell at ``min(t, D)``."""
    sp = X.space
    xs = X.values[sp.order]
    off = sp.offsets(t)
    first = np.repeat(xs[off[:-1]], np.diff(off))
    return bool(np.array_equal(xs, first))


def cond_expect_cells(space: FilteredSpace, t: int, x) -> np.ndarray:
    """Per-cell conditional expectations of the rows of ``x``; shape ``(..., n_cells)``."""
    x = np.asarray(x, dtype=float)
    flat = space.to_sorted(x.reshape(-1, space.n_atoms))
    out = kernels.seg_mean(flat, space.sorted_weights, space.offsets(t), space.cell_mass(t))
    return out.reshape(x.shape[:-1] + (out.shape[-1],))


def cond_expect(X: RandomVariable, t: int) -> RandomVariable:
    """``E[X | F_t]`` with ``E[X] = E[X+] - E[X-]`` and ``inf - inf = -inf``."""
    cells = cond_expect_cells(X.space, t, X.values)
    return RandomVariable(X.space, X.space.broadcast(cells, t))


def expectation(X: RandomVariable) -> float:
    return float(cond_expect_cells(X.space, 0, X.values)[0])


def indicator(space: FilteredSpace, t: int, cells: Iterable[int]) -> RandomVariable:
    """Indicator of a union of cells of the partition at ``t``."""
    cells = list(cells)
    n = space.n_cells(t)
    for c in cells:
        if not (0 <= int(c) < n):
            raise KeyError(f"unknown cell id {c} at t={t} (have {n} cells)")
    mask = np.isin(space.labels(t), np.asarray(cells, dtype=np.int64))
    return RandomVariable(space, mask.astype(float))


def require_measurable(X: RandomVariable, t: int, what: str = "value") -> None:
    if not is_measurable(X, t):
        raise NotMeasurable(f"{what} is not F_{t}-measurable")


# -- adapted processes -------------------------------------------------------

class AdaptedProcess:
    """Time-indexed family of random variables, ``X_t`` measurable at ``min(t, D)``.

    Either an explicit list for ``t = 0..H`` with a tail rule (``"hold"`` keeps
    ``X_H``), or a generator ``rule(T) -> values``. ``max_horizon`` caps the
    horizons a rule is valid for.
    """

    def __init__(self, space: FilteredSpace, rule: Callable[[int], np.ndarray], *,
                 explicit_horizon: int | None = None, max_horizon: int | None = None):
        self.space = space
        self._rule = rule
        self.explicit_horizon = explicit_horizon
        self.max_horizon = max_horizon

    @classmethod
    def explicit(cls, space: FilteredSpace, values: Sequence[Sequence[float]], tail: str = "hold") -> "AdaptedProcess":
        arrs = [np.array(v, dtype=float) for v in values]
        if not arrs:
            raise ValueError("explicit process needs at least one time step")
        for t, a in enumerate(arrs):
            if a.shape != (space.n_atoms,):
                raise ValueError(f"values at t={t} have shape {a.shape}, expected ({space.n_atoms},)")
            if np.any(np.isnan(a)):
                raise ValueError(f"NaN in values at t={t}")
            a.flags.writeable = False
        h = len(arrs) - 1
        if tail == "hold":
            def rule(T):
                return arrs[min(T, h)]
        else:
            raise ValueError(f"unknown tail rule {tail!r}")
        return cls(space, rule, explicit_horizon=h)

    def at(self, T: int) -> RandomVariable:
        return RandomVariable(self.space, self.values_at(T))

    def values_at(self, T: int) -> np.ndarray:
        if T < 0:
            raise ValueError("negative time")
        if self.max_horizon is not None and T > self.max_horizon:
            raise HorizonError(f"horizon {T} beyond process limit {self.max_horizon}")
        return np.asarray(self._rule(int(T)), dtype=float)

    def check_adapted(self, upto: int) -> None:
        for T in range(upto + 1):
            require_measurable(self.at(T), T, f"process value at t={T}")
