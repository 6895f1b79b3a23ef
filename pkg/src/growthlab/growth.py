"""Value processes, finite-horizon growth sequences and their liminf estimates.

Value processes are stored through ``ln V`` rather than ``V``: the horizons
of interest (``T`` in the thousands) put ``V_T`` far outside float64 range,
while ``ln V_T`` stays moderate. ``V_t = 0`` is ``ln V_t = -inf``.

Multiplication by an ``F_t``-measurable factor (:func:`scale_at`) is kept as a
separate list of ``(t, ln m)`` terms. In ``ln(V_T / V_t)`` a factor applied at
or before ``t`` contributes to both numerator and denominator, so it is
dropped instead of being added and subtracted; this keeps scale invariance
bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .assessors import Assessor, Entropic, RiskSeeking
from .errors import (AbsorptionViolation, BadDistribution, HorizonError, InvalidProcess, NegativeValue,
                     NonPositiveScaler, WindowTooLarge)
from .extreal import ext_add, ext_log, ext_sub
from .space import AdaptedProcess, FilteredSpace, RandomVariable, is_measurable

BLOCK_ROWS = 256


@dataclass(frozen=True)
class EstimatorConfig:
    """Horizon sweep and liminf window settings."""

    t_max: int = 2000
    window: int = 50
    tol: float = 1e-3

    def as_dict(self) -> dict:
        return {"t_max": self.t_max, "window": self.window, "tol": self.tol}


DEFAULT_CONFIG = EstimatorConfig()


# -- value processes ----------------------------------------------------------

class ValueProcess:
    """Nonnegative adapted process absorbed at zero, stored as ``ln V``.

    Use :func:`make_value_process` or :meth:`from_log` to build one; both
    validate nonnegativity, absorption and measurability on ``0..validated``.
    """

    def __init__(self, space: FilteredSpace, log_rule: Callable[[int], np.ndarray], *,
                 max_horizon: int | None, validated: int, v_tilde: bool, tau: np.ndarray,
                 scalings: tuple = (), name: str = "process"):
        self.space = space
        self._log_rule = log_rule
        self.max_horizon = max_horizon
        self.validated = validated
        self.v_tilde = v_tilde
        self.tau = tau
        self.scalings = scalings
        self.name = name

    @classmethod
    def from_log(cls, space: FilteredSpace, log_rule: Callable[[int], np.ndarray], *,
                 max_horizon: int | None = None, validate_upto: int | None = None,
                 name: str = "process") -> "ValueProcess":
        if validate_upto is None:
            validate_upto = space.depth + 2
        if max_horizon is not None:
            validate_upto = min(validate_upto, max_horizon)
        tau = np.full(space.n_atoms, np.inf)
        prev = None
        for T in range(validate_upto + 1):
            lv = np.asarray(log_rule(T), dtype=float)
            if lv.shape != (space.n_atoms,):
                raise InvalidProcess(f"log values at t={T} have shape {lv.shape}")
            if np.any(np.isnan(lv)):
                raise InvalidProcess(f"NaN value at t={T}")
            if np.any(lv == np.inf):
                raise InvalidProcess(f"infinite value at t={T}")
            if not is_measurable(RandomVariable(space, lv), T):
                from .errors import NotMeasurable

                raise NotMeasurable(f"value at t={T} is not F_{T}-measurable")
            dead = lv == -np.inf
            if prev is not None and np.any((prev == -np.inf) & ~dead):
                atom = int(np.flatnonzero((prev == -np.inf) & ~dead)[0])
                raise AbsorptionViolation(f"value revives after hitting 0 (atom {space.ids[atom]!r}, t={T})")
            tau = np.where(dead & np.isinf(tau), float(T), tau)
            prev = lv
        tau.flags.writeable = False
        return cls(space, log_rule, max_horizon=max_horizon, validated=validate_upto,
                   v_tilde=bool(np.all(np.isinf(tau))), tau=tau, name=name)

    # -- access ---------------------------------------------------------------
    def _check_horizon(self, T: int) -> None:
        if T < 0:
            raise ValueError("negative time")
        if self.max_horizon is not None and T > self.max_horizon:
            raise HorizonError(f"horizon {T} beyond process limit {self.max_horizon}")

    def base_log(self, T: int) -> np.ndarray:
        self._check_horizon(T)
        return np.asarray(self._log_rule(int(T)), dtype=float)

    def log_values_at(self, T: int) -> np.ndarray:
        """``ln V_T`` per atom (``-inf`` where ``V_T = 0``)."""
        out = self.base_log(T)
        for tk, log_m in self.scalings:
            if tk <= T:
                out = ext_add(out, log_m)
        return out

    def values_at(self, T: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values_at(T))

    def at(self, T: int) -> RandomVariable:
        return RandomVariable(self.space, self.values_at(T))

    def log_ratio(self, T: int, t: int) -> np.ndarray:
        """``ln(V_T / V_t)`` with ``ln(0 / v) = -inf``."""
        out = ext_sub(self.base_log(T), self.base_log(t))
        for tk, log_m in self.scalings:
            if tk <= t:
                out = ext_add(out, np.where(log_m == -np.inf, -np.inf, 0.0))
            elif tk <= T:
                out = ext_add(out, log_m)
        return out

    # -- derived processes ----------------------------------------------------
    def _derive(self, **kw) -> "ValueProcess":
        args = dict(max_horizon=self.max_horizon, validated=self.validated, v_tilde=self.v_tilde,
                    tau=self.tau, scalings=self.scalings, name=self.name)
        args.update(kw)
        log_rule = args.pop("log_rule", self._log_rule)
        return ValueProcess(self.space, log_rule, **args)

    def replace_at(self, k: int, values) -> "ValueProcess":
        """Process with ``V_k`` replaced (all other times unchanged); revalidated."""
        new_log = np.asarray(ext_log(np.asarray(values, dtype=float)), dtype=float)
        base = self._log_rule
        scalings = self.scalings

        def rule(T):
            if T != k:
                return base(T)
            # undo the scalings so that log_values_at(k) returns exactly new_log
            out = new_log
            for tk, log_m in scalings:
                if tk <= k:
                    out = ext_sub(out, np.where(log_m == -np.inf, 0.0, log_m))
            return out

        out = ValueProcess.from_log(self.space, rule, max_horizon=self.max_horizon,
                                    validate_upto=max(self.validated, k), name=self.name)
        return out._derive(scalings=self.scalings)

    def __repr__(self) -> str:
        return f"ValueProcess({self.name!r}, v_tilde={self.v_tilde}, max_horizon={self.max_horizon})"


def make_value_process(spec: AdaptedProcess, validate_upto: int | None = None, name: str = "process") -> ValueProcess:
    """Validate an adapted process of values as a member of the value-process space."""
    if validate_upto is None:
        h = spec.explicit_horizon if spec.explicit_horizon is not None else spec.space.depth + 1
        validate_upto = h + 1
    if spec.max_horizon is not None:
        validate_upto = min(validate_upto, spec.max_horizon)
    for T in range(validate_upto + 1):
        v = spec.values_at(T)
        if np.any(v < 0):
            raise NegativeValue(f"negative value at t={T}")

    def rule(T):
        v = spec.values_at(T)
        if np.any(v < 0):
            raise NegativeValue(f"negative value at t={T}")
        return ext_log(v)

    return ValueProcess.from_log(spec.space, rule, max_horizon=spec.max_horizon,
                                 validate_upto=validate_upto, name=name)


def explicit_value_process(space: FilteredSpace, values: Sequence[Sequence[float]], tail: str = "hold",
                           name: str = "explicit") -> ValueProcess:
    """Explicit values for ``t = 0..H`` and a tail rule.

    ``"hold"`` keeps ``V_H``; ``"linear"`` continues the last log-return
    per atom, ``ln V_T = ln V_H + (T - H)(ln V_H - ln V_{H-1})``.
    """
    arrs = [np.asarray(v, dtype=float) for v in values]
    if not arrs:
        raise InvalidProcess("explicit process needs at least one time step")
    for t, a in enumerate(arrs):
        if a.shape != (space.n_atoms,):
            raise InvalidProcess(f"values at t={t} have shape {a.shape}, expected ({space.n_atoms},)")
        if np.any(np.isnan(a)):
            raise InvalidProcess(f"NaN in values at t={t}")
        if np.any(a < 0):
            raise NegativeValue(f"negative value at t={t}")
    logs = [np.asarray(ext_log(a), dtype=float) for a in arrs]
    h = len(logs) - 1
    if tail == "hold":
        def rule(T):
            return logs[min(T, h)]
    elif tail == "linear":
        step = ext_sub(logs[h], logs[h - 1]) if h >= 1 else np.zeros(space.n_atoms)

        def rule(T):
            if T <= h:
                return logs[T]
            return ext_add(logs[h], np.where(step == 0.0, 0.0, (T - h) * step))
    else:
        raise InvalidProcess(f"unknown tail rule {tail!r}")
    return ValueProcess.from_log(space, rule, validate_upto=h + 1, name=name)


def constant_process(space: FilteredSpace, c: float = 1.0) -> ValueProcess:
    if c < 0:
        raise NegativeValue("constant value must be nonnegative")
    lv = np.full(space.n_atoms, ext_log(float(c)))
    return ValueProcess.from_log(space, lambda T: lv, name=f"constant({c})")


def exp_growth_process(space: FilteredSpace, rate: float = 1.0) -> ValueProcess:
    """Deterministic ``V_T = exp(rate * T)``."""
    ones = np.ones(space.n_atoms)
    return ValueProcess.from_log(space, lambda T: rate * T * ones, name=f"exp_growth({rate})")


def _as_factor(space: FilteredSpace, m) -> np.ndarray:
    if isinstance(m, RandomVariable):
        return np.asarray(m.values, dtype=float)
    m = np.asarray(m, dtype=float)
    return np.full(space.n_atoms, float(m)) if m.ndim == 0 else m


def scale_at(V: ValueProcess, t: int, m, allow_zero: bool = False) -> ValueProcess:
    """``m ._t V = (V_0, .., V_{t-1}, m V_t, m V_{t+1}, ..)`` for ``F_t``-measurable ``m``.

    ``allow_zero`` admits ``m >= 0`` (e.g. an indicator), which keeps the
    result in the value-process space but not in the strictly positive one.
    """
    from .space import require_measurable

    m = _as_factor(V.space, m)
    require_measurable(RandomVariable(V.space, m), t, "scaling factor")
    if not np.all(np.isfinite(m)):
        raise NonPositiveScaler("scaling factor must be finite")
    if np.any(m < 0) or (not allow_zero and np.any(m == 0)):
        raise NonPositiveScaler("scaling factor must be positive")
    log_m = np.asarray(ext_log(m), dtype=float)
    log_m.flags.writeable = False
    dead = (log_m == -np.inf) & np.isinf(V.tau)
    tau = np.where(dead, float(t), np.minimum(V.tau, np.where(log_m == -np.inf, float(t), np.inf)))
    return V._derive(scalings=V.scalings + ((int(t), log_m),), v_tilde=V.v_tilde and not np.any(m == 0),
                     tau=tau)


# -- horizon sequences and liminf ---------------------------------------------

@dataclass(frozen=True)
class HorizonSequence:
    """``g_T`` for ``T = t+1 .. T_max``, stored per cell of ``F_t``."""

    space: FilteredSpace
    t: int
    horizons: np.ndarray
    cells: np.ndarray = field(repr=False)
    window: int = DEFAULT_CONFIG.window
    tol: float = DEFAULT_CONFIG.tol

    def g(self, T: int) -> RandomVariable:
        i = int(T) - self.t - 1
        if not 0 <= i < self.horizons.size:
            raise HorizonError(f"horizon {T} not in sequence")
        return RandomVariable(self.space, self.space.broadcast(self.cells[i], self.t))

    @property
    def values(self) -> list[RandomVariable]:
        return [self.g(T) for T in self.horizons]

    @property
    def t_max(self) -> int:
        return int(self.horizons[-1])


@dataclass(frozen=True)
class LiminfEstimate:
    space: FilteredSpace
    t: int
    cell_values: np.ndarray
    converged: np.ndarray
    tail_spread: np.ndarray

    @property
    def value(self) -> RandomVariable:
        return RandomVariable(self.space, self.space.broadcast(self.cell_values, self.t))

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def records(self) -> list[dict]:
        return [{"cell": i, "value": float(v), "converged": bool(c), "tail_spread": float(s)}
                for i, (v, c, s) in enumerate(zip(self.cell_values, self.converged, self.tail_spread))]


def _sweep(V: ValueProcess, t: int, t_max: int, rows_for: Callable[[np.ndarray], np.ndarray],
           evaluate: Callable[[np.ndarray], np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    if t_max <= t:
        raise HorizonError(f"T_max={t_max} must exceed t={t}")
    if V.max_horizon is not None and t_max > V.max_horizon:
        raise HorizonError(f"T_max={t_max} beyond process limit {V.max_horizon}")
    horizons = np.arange(t + 1, t_max + 1)
    out = np.empty((horizons.size, V.space.n_cells(t)))
    for start in range(0, horizons.size, BLOCK_ROWS):
        hs = horizons[start:start + BLOCK_ROWS]
        out[start:start + hs.size] = evaluate(rows_for(hs)) / hs[:, None]
    return horizons, out


def horizon_seq(V: ValueProcess, t: int, mu: Assessor, T_max: int, normalize: bool = True,
                cfg: EstimatorConfig = DEFAULT_CONFIG) -> HorizonSequence:
    """``g_T = mu_t(ln(V_T / V_t)) / T``, or ``mu_t(ln V_T) / T`` when ``normalize`` is False."""
    if normalize:
        base_t = V.log_values_at(t)
        del base_t  # validates the horizon early

        def rows_for(hs):
            return np.stack([V.log_ratio(int(T), t) for T in hs])
    else:
        def rows_for(hs):
            return np.stack([V.log_values_at(int(T)) for T in hs])

    horizons, cells = _sweep(V, t, T_max, rows_for, lambda rows: mu.cells(V.space, t, rows))
    return HorizonSequence(V.space, t, horizons, cells, cfg.window, cfg.tol)


def liminf_estimate(seq: HorizonSequence, window: int | None = None, tol: float | None = None) -> LiminfEstimate:
    """Per-cell minimum of ``g_T`` over ``[T_max - W, T_max]`` with a spread diagnostic."""
    W = seq.window if window is None else int(window)
    tol = seq.tol if tol is None else float(tol)
    if W < 0 or seq.t_max - seq.t <= W:
        raise WindowTooLarge(f"window {W} needs T_max - t > W (T_max={seq.t_max}, t={seq.t})")
    tail = seq.cells[-(W + 1):]
    lo, hi = tail.min(axis=0), tail.max(axis=0)
    with np.errstate(invalid="ignore"):
        spread = np.where(lo == hi, 0.0, hi - lo)
    spread = np.where(np.isnan(spread), np.inf, spread)
    converged = (spread < tol) | (lo == -np.inf)
    return LiminfEstimate(seq.space, seq.t, lo, converged, spread)


def dlgi(V: ValueProcess, t: int, mu: Assessor, cfg: EstimatorConfig = DEFAULT_CONFIG) -> LiminfEstimate:
    """Dynamic limit growth index generated by ``mu`` at time ``t``."""
    return liminf_estimate(horizon_seq(V, t, mu, cfg.t_max, True, cfg))


def rsc_seq(V: ValueProcess, t: int, gamma: float, cfg: EstimatorConfig = DEFAULT_CONFIG) -> HorizonSequence:
    """``(1/(gamma T)) ln E[V_T^gamma | F_t]`` (``(1/T) E[ln V_T | F_t]`` at ``gamma = 0``).

    ``E[V_T^gamma]`` is evaluated as ``E[exp(gamma ln V_T)]`` with a per-cell
    log-sum-exp shift.
    """
    return horizon_seq(V, t, Entropic(gamma), cfg.t_max, normalize=False, cfg=cfg)


def rsc(V: ValueProcess, t: int, gamma: float, cfg: EstimatorConfig = DEFAULT_CONFIG) -> LiminfEstimate:
    """Risk sensitive criterion ``phi^gamma_t(V)``."""
    return liminf_estimate(rsc_seq(V, t, gamma, cfg))


def rsc_dlgi_gap(V: ValueProcess, t: int, gamma: float, T_max: int) -> float:
    """Largest per-horizon gap between the criterion and the entropic index.

    By cash additivity ``mu(ln V_T) - ln V_t = mu(ln(V_T / V_t))``, so on cells
    with ``V_t > 0`` the two sequences differ by exactly ``ln V_t / T``.
    """
    cfg = EstimatorConfig(t_max=T_max, window=0)
    a = rsc_seq(V, t, gamma, cfg).cells
    b = horizon_seq(V, t, Entropic(gamma), T_max, True, cfg).cells
    lvt = RandomVariable(V.space, V.log_values_at(t)).cell_values(t)
    live = np.isfinite(lvt)
    shifted = a[:, live] - lvt[live][None, :] / np.arange(t + 1, T_max + 1)[:, None]
    bb = b[:, live]
    same = shifted == bb
    with np.errstate(invalid="ignore"):
        diff = np.where(same, 0.0, np.abs(shifted - bb))
    diff = np.where(np.isnan(diff), np.inf, diff)
    dead_ok = np.all(b[:, ~live] == -np.inf) if np.any(~live) else True
    return float(diff.max(initial=0.0)) if dead_ok else math.inf


@dataclass(frozen=True)
class RscPlusResult:
    value: LiminfEstimate
    risk_seeking: LiminfEstimate
    gap: np.ndarray

    def max_gap(self, converged_only: bool = True) -> float:
        mask = self.value.converged & self.risk_seeking.converged if converged_only else np.ones_like(self.gap, bool)
        return float(self.gap[mask].max(initial=0.0))


def rsc_plus(V: ValueProcess, t: int, gamma: float, cfg: EstimatorConfig = DEFAULT_CONFIG) -> RscPlusResult:
    """``[phi^gamma_t(V)]^+`` for ``gamma > 0`` together with the risk-seeking index.

    The risk-seeking path is ``liminf mu^gamma_t([ln(V_T / V_t)]^+) / T``.
    """
    if not gamma > 0:
        raise ValueError("rsc_plus needs gamma > 0")
    base = rsc(V, t, gamma, cfg)
    plus = LiminfEstimate(base.space, t, np.maximum(base.cell_values, 0.0), base.converged, base.tail_spread)
    rs = dlgi(V, t, RiskSeeking(Entropic(gamma)), cfg)
    with np.errstate(invalid="ignore"):
        gap = np.abs(plus.cell_values - rs.cell_values)
    gap = np.where(plus.cell_values == rs.cell_values, 0.0, gap)
    return RscPlusResult(plus, rs, gap)


@dataclass(frozen=True)
class Enough1Report:
    normalized: LiminfEstimate
    unnormalized: LiminfEstimate
    gap: np.ndarray
    bound: float
    passed: bool


def check_enough1(V: ValueProcess, t: int, mu: Assessor, cfg: EstimatorConfig = DEFAULT_CONFIG,
                  tol: float | None = None) -> Enough1Report:
    """Compare the index with and without the ``1/V_t`` normalization.

    The default tolerance is ``max |ln V_t| / (T_max - W)``: for cash-additive
    ``mu`` the two sequences differ by ``ln V_t / T``.
    """
    norm = liminf_estimate(horizon_seq(V, t, mu, cfg.t_max, True, cfg))
    raw = liminf_estimate(horizon_seq(V, t, mu, cfg.t_max, False, cfg))
    lvt = RandomVariable(V.space, V.log_values_at(t)).cell_values(t)
    fin = lvt[np.isfinite(lvt)]
    bound = float(np.abs(fin).max(initial=0.0)) / (cfg.t_max - cfg.window)
    tol = bound if tol is None else tol
    a, b = norm.cell_values, raw.cell_values
    with np.errstate(invalid="ignore"):
        gap = np.where(a == b, 0.0, np.abs(a - b))
    gap = np.where(np.isnan(gap), np.inf, gap)
    mask = norm.converged & raw.converged
    passed = bool(np.all(gap[mask] <= tol * (1 + 1e-9) + 1e-15))
    return Enough1Report(norm, raw, gap, bound, passed)


# -- i.i.d. products ----------------------------------------------------------

@dataclass(frozen=True)
class StepDistribution:
    """Finite log-return distribution ``{(x_j, p_j)}``."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.ndim != 1 or x.shape != p.shape or x.size == 0:
            raise BadDistribution("step values and probabilities must be matching nonempty vectors")
        if not np.all(np.isfinite(x)):
            raise BadDistribution("step values must be finite")
        if np.any(~np.isfinite(p)) or np.any(p <= 0) or abs(math.fsum(p) - 1.0) > 1e-12:
            raise BadDistribution("step probabilities must be positive and sum to 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_pairs(cls, pairs) -> "StepDistribution":
        pairs = list(pairs)
        return cls(np.array([a for a, _ in pairs], dtype=float), np.array([b for _, b in pairs], dtype=float))

    @classmethod
    def binomial(cls, sigma: float) -> "StepDistribution":
        return cls(np.array([-sigma, sigma]), np.array([0.5, 0.5]))


def iid_rsc_closed_form(step: StepDistribution, gamma: float) -> float:
    """Constant value of the criterion for ``V_t = V_0 exp(sum of i.i.d. steps)``.

    Independence makes ``ln E[exp(gamma ln V_T)]`` additive over steps, so the
    criterion is the per-step cumulant ``(1/gamma) ln sum p_j e^{gamma x_j}``.
    """
    if gamma == 0:
        return math.fsum(step.p * step.x)
    return float(logsumexp(gamma * step.x, b=step.p)) / gamma


def iid_tree_space(step: StepDistribution, T: int) -> FilteredSpace:
    """All ``K^T`` step paths; ``F_s`` is generated by the first ``s`` steps."""
    K = step.x.size
    n = K ** T
    idx = np.arange(n, dtype=np.int64)
    labels = [idx // K ** (T - s) for s in range(T + 1)]
    digits = np.stack([(idx // K ** (T - 1 - s)) % K for s in range(T)]) if T else np.zeros((0, n), np.int64)
    probs = np.prod(step.p[digits], axis=0) if T else np.ones(1)
    return FilteredSpace(probs / probs.sum(), labels)


def iid_tree_process(step: StepDistribution, T: int, v0: float = 1.0) -> ValueProcess:
    """Explicit i.i.d.-product value process on :func:`iid_tree_space`."""
    K = step.x.size
    space = iid_tree_space(step, T)
    idx = np.arange(space.n_atoms, dtype=np.int64)
    incs = np.stack([step.x[(idx // K ** (T - 1 - s)) % K] for s in range(T)]) if T else np.zeros((0, 1))
    cum = np.vstack([np.zeros(space.n_atoms), np.cumsum(incs, axis=0)]) + math.log(v0)
    return ValueProcess.from_log(space, lambda s: cum[min(s, T)], max_horizon=T, validate_upto=T, name="iid_tree")


def iid_tree_rsc(step: StepDistribution, gamma: float, T: int) -> float:
    """Brute-force ``(1/(gamma T)) ln E[V_T^gamma]`` by enumerating the path tree (``V_0 = 1``)."""
    V = iid_tree_process(step, T)
    return float(Entropic(gamma).cells(V.space, 0, V.log_values_at(T))[0]) / T
