"""Randomized checkers for the axioms, with replayable witnesses.

Instances come from :class:`InstanceGen`: trial ``k`` of a generator with
seed ``s`` draws everything from ``SeedSequence([s, k])``, so a witness is
replayed by running the same checker with ``first_trial=k, trials=1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assessors import Assessor, Entropic, hat_eval
from .growth import EstimatorConfig, LiminfEstimate, ValueProcess, horizon_seq, scale_at
from .space import FilteredSpace, RandomVariable, cond_expect_cells, indicator

ALGEBRAIC_TOL = 0.0
CHAIN_TOL = 1e-10
IDENTITY_TOL = 1e-12


# -- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    seed: int
    trial: int
    magnitude: float
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "trial": self.trial, "magnitude": self.magnitude, **self.detail}


@dataclass
class CheckReport:
    name: str
    trials: int = 0
    failures: list[Witness] = field(default_factory=list)
    inconclusive: int = 0
    tol: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.failures:
            return "fail"
        if self.trials and self.inconclusive == self.trials:
            return "inconclusive"
        return "pass"

    @property
    def max_violation(self) -> float:
        return max((w.magnitude for w in self.failures), default=0.0)

    def merge(self, other: "CheckReport") -> "CheckReport":
        return CheckReport(self.name, self.trials + other.trials, self.failures + other.failures,
                           self.inconclusive + other.inconclusive, max(self.tol, other.tol),
                           {**self.notes, **other.notes})

    def as_dict(self) -> dict:
        return {"property": self.name, "verdict": self.verdict, "trials": self.trials,
                "failures": len(self.failures), "inconclusive": self.inconclusive, "tol": self.tol,
                "max_violation": self.max_violation,
                "witness": self.failures[0].as_dict() if self.failures else None}


def _violation(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Largest amount by which ``lhs >= rhs`` fails (0 when it holds)."""
    lhs, rhs = np.asarray(lhs, float), np.asarray(rhs, float)
    bad = lhs < rhs
    if not np.any(bad):
        return 0.0
    with np.errstate(invalid="ignore"):
        d = rhs[bad] - lhs[bad]
    return float(np.nanmax(np.where(np.isnan(d), np.inf, d)))


def _mismatch(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    same = a == b
    if np.all(same):
        return 0.0
    with np.errstate(invalid="ignore"):
        d = np.abs(a[~same] - b[~same])
    return float(np.max(np.where(np.isnan(d), np.inf, d)))


# -- instance generation ------------------------------------------------------

@dataclass(frozen=True)
class InstanceGen:
    """Deterministic generator of small random spaces, variables and value processes."""

    seed: int = 0
    max_depth: int = 4
    max_branching: int = 3
    log_step: float = 0.5
    value_scale: float = 2.0
    positive: bool = True
    absorption_prob: float = 0.0

    def __post_init__(self):
        if not 1 <= self.max_depth <= 4 or not 2 <= self.max_branching <= 3:
            raise ValueError("depth must be in 1..4 and branching in 2..3")

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, trial]))


@dataclass(frozen=True)
class Instance:
    space: FilteredSpace
    processes: tuple[ValueProcess, ValueProcess]
    X: RandomVariable
    Y: RandomVariable
    t: int
    s: int
    rng: np.random.Generator = field(repr=False)


def random_space(rng: np.random.Generator, max_depth: int = 4, max_branching: int = 3) -> FilteredSpace:
    """Random tree: the root splits at least in two, every node then in 1..max_branching."""
    D = int(rng.integers(1, max_depth + 1))
    parents = [np.zeros(1, dtype=np.int64)]
    for t in range(D):
        n_nodes = parents[-1].size
        kids = rng.integers(2 if t == 0 else 1, max_branching + 1, size=n_nodes)
        parents.append(np.repeat(np.arange(n_nodes), kids))
    n = parents[-1].size
    labels = [None] * (D + 1)
    labels[D] = np.arange(n, dtype=np.int64)
    for t in range(D, 0, -1):
        labels[t - 1] = parents[t][labels[t]]
    p = rng.dirichlet(np.ones(n)) + 0.05 / n
    return FilteredSpace(p / p.sum(), labels)


def random_process(space: FilteredSpace, rng: np.random.Generator, log_step: float = 0.5,
                   absorption_prob: float = 0.0, name: str = "random") -> ValueProcess:
    """Explicit adapted log path up to ``H = D + 2`` then a per-atom linear log tail."""
    D = space.depth
    H = D + 2
    logs = [np.full(space.n_atoms, float(rng.normal()))]
    dead = np.zeros(space.n_atoms, bool)
    for t in range(1, H + 1):
        lab = space.labels(t)
        inc = rng.normal(0.0, log_step, size=space.n_cells(t))[lab]
        if absorption_prob > 0:
            dead = dead | (rng.random(space.n_cells(t)) < absorption_prob)[lab]
        logs.append(np.where(dead, -np.inf, logs[-1] + inc))
    drift = np.where(dead, 0.0, logs[H] - np.where(dead, 0.0, logs[H - 1]))
    for a in logs:
        a.flags.writeable = False

    def rule(T):
        if T <= H:
            return logs[T]
        return np.where(dead, -np.inf, logs[H] + (T - H) * drift)

    return ValueProcess.from_log(space, rule, validate_upto=H + 1, name=name)


def gen_instance(gen: InstanceGen, trial: int = 0) -> Instance:
    rng = gen.rng(trial)
    space = random_space(rng, gen.max_depth, gen.max_branching)
    absorb = 0.0 if gen.positive else gen.absorption_prob
    procs = tuple(random_process(space, rng, gen.log_step, absorb, f"V{k}") for k in range(2))
    X = RandomVariable(space, rng.normal(0.0, gen.value_scale, size=space.n_atoms))
    Y = RandomVariable(space, rng.normal(0.0, gen.value_scale, size=space.n_atoms))
    D = space.depth
    t = int(rng.integers(0, D))
    s = int(rng.integers(t + 1, D + 1))
    return Instance(space, procs, X, Y, t, s, rng)


def measurable_rv(space: FilteredSpace, t: int, cell_values) -> RandomVariable:
    return RandomVariable(space, space.broadcast(cell_values, t))


# -- index families -----------------------------------------------------------

@dataclass(frozen=True)
class GrowthIndex:
    """Per-horizon index ``mu_t(ln(V_T/V_t))/T`` (``mu_t(ln V_T)/T`` if not normalized)."""

    mu: Assessor
    normalize: bool = True

    def seq(self, V: ValueProcess, t: int, T_max: int) -> np.ndarray:
        return horizon_seq(V, t, self.mu, T_max, self.normalize).cells


HORIZONS = 12


# -- assessor-level checks ----------------------------------------------------

def check_local(f: Assessor | GrowthIndex, gen: InstanceGen, trials: int = 200, first_trial: int = 0) -> CheckReport:
    """``I_A f(X) = I_A f(I_A X)`` for ``A`` a random union of ``F_t`` cells."""
    rep = CheckReport("locality", tol=ALGEBRAIC_TOL)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t, rng = inst.space, inst.t, inst.rng
        n = sp.n_cells(t)
        A = np.flatnonzero(rng.random(n) < 0.5)
        if A.size == 0:
            A = np.array([int(rng.integers(n))])
        ind = indicator(sp, t, A)
        if isinstance(f, GrowthIndex):
            V = inst.processes[0]
            a = f.seq(V, t, t + HORIZONS)[:, A]
            b = f.seq(scale_at(V, t, ind, allow_zero=True), t, t + HORIZONS)[:, A]
        else:
            a = f.cells(sp, t, inst.X.values)[A]
            b = f.cells(sp, t, (ind * inst.X).values)[A]
        rep.trials += 1
        m = _mismatch(a, b)
        if m > rep.tol:
            rep.failures.append(Witness(gen.seed, k, m, {"t": t, "cells": A.tolist()}))
    return rep


def check_monotone(f: Assessor | GrowthIndex, gen: InstanceGen, trials: int = 200, first_trial: int = 0,
                   tol: float = IDENTITY_TOL) -> CheckReport:
    """``X <= Y => f(X) <= f(Y)``; for an index, ``V <= V'`` pointwise at every time."""
    rep = CheckReport("monotonicity", tol=tol)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t, rng = inst.space, inst.t, inst.rng
        bump = np.abs(rng.normal(0.0, 1.0, size=sp.n_atoms)) * (rng.random(sp.n_atoms) < 0.7)
        if isinstance(f, GrowthIndex):
            V = inst.processes[0]
            # a nonnegative increment of ln V_T at every T keeps V' >= V pointwise
            W = ValueProcess.from_log(sp, lambda T, V=V: V.log_values_at(T) + _adapted_bump(sp, bump, T),
                                      validate_upto=sp.depth + 3)
            a, b = f.seq(V, t, t + HORIZONS), f.seq(W, t, t + HORIZONS)
        else:
            a = f.cells(sp, t, inst.X.values)
            b = f.cells(sp, t, inst.X.values + bump)
        rep.trials += 1
        v = _violation(b + tol, a)
        if v > 0:
            rep.failures.append(Witness(gen.seed, k, v, {"t": t}))
    return rep


def _adapted_bump(space: FilteredSpace, bump: np.ndarray, T: int) -> np.ndarray:
    """``F_T``-measurable nonnegative version of ``bump`` (its per-cell minimum)."""
    lab = space.labels(T)
    mins = np.full(space.n_cells(T), np.inf)
    np.minimum.at(mins, lab, bump)
    return mins[lab]


def check_cash_additive(mu: Assessor, gen: InstanceGen, trials: int = 200, first_trial: int = 0,
                        tol: float = IDENTITY_TOL) -> CheckReport:
    """``mu_t(X + m) = mu_t(X) + m`` for finite ``F_t``-measurable ``m``."""
    rep = CheckReport("cash_additivity", tol=tol)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t = inst.space, inst.t
        m = inst.rng.normal(0.0, 3.0, size=sp.n_cells(t))
        a = mu.cells(sp, t, inst.X.values + sp.broadcast(m, t))
        b = mu.cells(sp, t, inst.X.values) + m
        rep.trials += 1
        d = float(np.max(np.abs(a - b)))
        if d > tol:
            rep.failures.append(Witness(gen.seed, k, d, {"t": t}))
    return rep


def check_strong_tc(mu: Assessor, gen: InstanceGen, trials: int = 200, first_trial: int = 0,
                    tol: float = IDENTITY_TOL, recursion: bool | None = None) -> CheckReport:
    """``mu_s(X) >= mu_s(Y) => mu_t(X) >= mu_t(Y)`` for ``t < s``.

    Candidates for ``Y`` are an independent draw, ``mu_s(X)`` itself and a
    shifted copy of it. With ``recursion`` (default: entropic assessors) the
    identity ``mu_t(mu_s(X)) = mu_t(X)`` is asserted as well.
    """
    if recursion is None:
        recursion = mu.kind == "entropic"
    rep = CheckReport("strong_time_consistency", tol=tol)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t, s = inst.space, inst.t, inst.s
        x = inst.X.values
        ms_x = sp.broadcast(mu.cells(sp, s, x), s)
        shift = sp.broadcast(np.abs(inst.rng.normal(size=sp.n_cells(s))), s)
        worst = 0.0
        for y in (inst.Y.values, ms_x, ms_x - shift):
            ms_y = sp.broadcast(mu.cells(sp, s, y), s)
            mt_x, mt_y = mu.cells(sp, t, x), mu.cells(sp, t, y)
            if np.all(ms_x >= ms_y - tol):
                worst = max(worst, _violation(mt_x + tol, mt_y))
            if np.all(ms_y >= ms_x - tol):
                worst = max(worst, _violation(mt_y + tol, mt_x))
        if recursion:
            d = float(np.max(np.abs(mu.cells(sp, t, ms_x) - mu.cells(sp, t, x))))
            worst = max(worst, d if d > tol else 0.0)
        rep.trials += 1
        if worst > 0:
            rep.failures.append(Witness(gen.seed, k, worst, {"t": t, "s": s}))
    return rep


def check_assessor_martingale(gamma: float, gen: InstanceGen, trials: int = 200, first_trial: int = 0,
                              tol: float = IDENTITY_TOL, family: Callable[[float], Assessor] = Entropic) -> CheckReport:
    """``E[mu_s(X) | F_t] <= mu_t(X)`` for ``gamma >= 0`` and ``>=`` for ``gamma <= 0``."""
    kind = "super" if gamma >= 0 else "sub"
    rep = CheckReport(f"entropic_{kind}martingale", tol=tol)
    mu = family(gamma)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t, s = inst.space, inst.t, inst.s
        inner = sp.broadcast(mu.cells(sp, s, inst.X.values), s)
        lhs = cond_expect_cells(sp, t, inner)
        rhs = mu.cells(sp, t, inst.X.values)
        v = _violation(rhs + tol, lhs) if kind == "super" else _violation(lhs + tol, rhs)
        if gamma == 0:
            v = max(v, _violation(lhs + tol, rhs))
        rep.trials += 1
        if v > 0:
            rep.failures.append(Witness(gen.seed, k, v, {"t": t, "s": s, "gamma": gamma}))
    return rep


def _generic_hat(base, t, X, n_max=60):
    return hat_eval(_GenericView(base), t, X, n_max=n_max)


class _GenericView(Assessor):
    """Hides ``builtin`` so that :func:`hat_eval` takes the truncation route."""

    builtin = False

    def __init__(self, base: Assessor):
        self.base = base

    def _cells(self, space, t, rows):
        return self.base._cells(space, t, rows)

    def config(self):
        return self.base.config()


def check_hat_bounded(mu: Assessor, gen: InstanceGen, trials: int = 50, first_trial: int = 0,
                      hat: Callable = _generic_hat) -> CheckReport:
    """Hat value computed by truncation equals the direct value on bounded inputs (exact)."""
    rep = CheckReport("hat_equals_base_on_bounded", tol=ALGEBRAIC_TOL)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t = inst.space, inst.t
        X = RandomVariable(sp, inst.X.values * 4.0)
        res = hat(mu, t, X)
        a = res.value.cell_values(t)
        b = mu.cells(sp, t, X.values)
        rep.trials += 1
        m = _mismatch(a, b)
        if m > 0 or not np.all(res.converged):
            rep.failures.append(Witness(gen.seed, k, m, {"t": t}))
    return rep


# -- index-level checks -------------------------------------------------------

def check_scale_invariant(index: GrowthIndex, gen: InstanceGen, trials: int = 200, first_trial: int = 0) -> CheckReport:
    """Per-horizon ``g_T`` is bit-identical after ``scale_at(V, t, beta)``."""
    rep = CheckReport("scale_invariance", tol=ALGEBRAIC_TOL)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t, V = inst.space, inst.t, inst.processes[0]
        beta = measurable_rv(sp, t, np.exp(inst.rng.normal(0.0, 3.0, size=sp.n_cells(t))))
        a = index.seq(V, t, t + HORIZONS)
        b = index.seq(scale_at(V, t, beta), t, t + HORIZONS)
        rep.trials += 1
        m = _mismatch(a, b)
        if m > 0:
            rep.failures.append(Witness(gen.seed, k, m, {"t": t}))
    return rep


def mixture_log(lam: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``ln(lam e^a + (1 - lam) e^b)`` with ``-inf`` entries allowed."""
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(lam) + a, np.log1p(-lam) + b)


def check_quasiconcave_corrected(mu: Assessor, gen: InstanceGen, trials: int = 200, T: int = 10,
                                 first_trial: int = 0, tol: float = CHAIN_TOL) -> CheckReport:
    """``mu(ln(lam V_T + (1-lam) V'_T))/T >= min(mu(ln V_T)/T + ln(lam)/T, mu(ln V'_T)/T + ln(1-lam)/T)``."""
    rep = CheckReport("quasiconcavity_corrected", tol=tol)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t = inst.space, inst.t
        V, W = inst.processes
        lam_c = inst.rng.uniform(0.05, 0.95, size=sp.n_cells(t))
        lam = sp.broadcast(lam_c, t)
        Th = max(T, t + 1)
        a, b = V.log_values_at(Th), W.log_values_at(Th)
        lhs = mu.cells(sp, t, mixture_log(lam, a, b)) / Th
        rhs = np.minimum(mu.cells(sp, t, a) / Th + np.log(lam_c) / Th,
                         mu.cells(sp, t, b) / Th + np.log1p(-lam_c) / Th)
        rep.trials += 1
        v = _violation(lhs + tol, rhs)
        if v > 0:
            rep.failures.append(Witness(gen.seed, k, v, {"t": t, "T": Th}))
    return rep


def check_gamma_monotone(processes: Sequence[ValueProcess], gammas: Sequence[float], t: int, T_max: int = 50,
                         tol: float = IDENTITY_TOL, family: Callable[[float], Assessor] = Entropic,
                         seed: int = 0) -> CheckReport:
    """Per-horizon index values nondecreasing along the sorted ``gammas``."""
    rep = CheckReport("gamma_monotonicity", tol=tol)
    gs = sorted(gammas)
    for i, V in enumerate(processes):
        seqs = [GrowthIndex(family(g)).seq(V, t, T_max) for g in gs]
        worst = 0.0
        for lo, hi in zip(seqs, seqs[1:]):
            worst = max(worst, _violation(hi + tol, lo))
        rep.trials += 1
        if worst > 0:
            rep.failures.append(Witness(seed, i, worst, {"process": V.name, "t": t}))
    return rep


def check_gamma_monotone_random(gen: InstanceGen, trials: int = 200, gammas=(-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0),
                                first_trial: int = 0, family: Callable[[float], Assessor] = Entropic) -> CheckReport:
    rep = CheckReport("gamma_monotonicity", tol=IDENTITY_TOL)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        r = check_gamma_monotone([inst.processes[0]], gammas, inst.t, inst.t + HORIZONS, family=family, seed=gen.seed)
        rep.trials += 1
        if r.failures:
            rep.failures.append(Witness(gen.seed, k, r.max_violation, {"t": inst.t}))
    return rep


def tc_equivalence(space: FilteredSpace, t: int, phi_t: np.ndarray, phi_s: np.ndarray,
                       rng: np.random.Generator, kind: str = "super", n_alternatives: int = 4) -> tuple[bool, bool]:
    """Implication form versus martingale form of time consistency, on given arrays.

    ``phi_t`` holds per-cell values at ``t``, ``phi_s`` per-atom values at
    ``s``. Candidates ``m_s`` are ``phi_s`` (the canonical witness) and
    copies shifted by ``-|noise|`` (``+|noise|`` for ``kind="sub"``) that
    keep the premise true. Returns ``(implication_holds, martingale_holds)``.
    """
    sign = 1.0 if kind == "super" else -1.0
    e_phi = cond_expect_cells(space, t, phi_s)
    martingale = bool(np.all(sign * phi_t >= sign * e_phi))
    cands = [phi_s] + [phi_s - sign * np.abs(rng.normal(size=phi_s.size)) for _ in range(n_alternatives)]
    implication = True
    for m in cands:
        premise = bool(np.all(sign * phi_s >= sign * m))
        conclusion = bool(np.all(sign * phi_t >= sign * cond_expect_cells(space, t, m)))
        implication &= (not premise) or conclusion
    return implication, martingale


def check_tc_equivalence(gen: InstanceGen, trials: int = 200, first_trial: int = 0, gamma: float = 1.0) -> CheckReport:
    """The two forms of time consistency agree on computed index arrays (exact logic)."""
    rep = CheckReport("timeconsistency_equivalence", tol=ALGEBRAIC_TOL)
    mu = Entropic(gamma)
    for k in range(first_trial, first_trial + trials):
        inst = gen_instance(gen, k)
        sp, t, s, V = inst.space, inst.t, inst.s, inst.processes[0]
        T = s + HORIZONS
        phi_t = horizon_seq(V, t, mu, T).cells[-1]
        phi_s = sp.broadcast(horizon_seq(V, s, mu, T).cells[-1], s)
        for kind in ("super", "sub"):
            imp, mart = tc_equivalence(sp, t, phi_t, phi_s, inst.rng, kind)
            if imp != mart:
                rep.failures.append(Witness(gen.seed, k, 1.0, {"t": t, "s": s, "kind": kind}))
        rep.trials += 1
    return rep


def estimator_tolerance(V: ValueProcess, t: int, s: int, gamma: float, cfg: EstimatorConfig) -> float:
    """Finite-horizon error scale of the liminf estimates at ``t`` and ``s``.

    ``|ln V_u| / T`` terms from the starting values, plus ``|ln p_min| / (|gamma| T)``
    from the conditional probabilities inside the entropic log-sum-exp.
    """
    span = cfg.t_max - cfg.window
    lv = np.r_[V.log_values_at(t), V.log_values_at(s)]
    start = float(np.abs(lv[np.isfinite(lv)]).max(initial=0.0))
    prob = 0.0 if gamma == 0 else float(-np.log(V.space.probs.min())) / abs(gamma)
    return (2 * start + prob) / span


def _martingale_check(kind: str, index: Callable[[ValueProcess, int], LiminfEstimate],
                      processes: Sequence[ValueProcess], t: int, s: int, tol: float | Callable,
                      seed: int = 0) -> CheckReport:
    rep = CheckReport(f"{kind}martingale_consistency", tol=0.0)
    sign = 1.0 if kind == "super" else -1.0
    rng = np.random.default_rng(np.random.SeedSequence([seed, 42]))
    for i, V in enumerate(processes):
        sp = V.space
        ft, fs = index(V, t), index(V, s)
        tl = tol(V) if callable(tol) else float(tol)
        rep.tol = max(rep.tol, tl)
        phi_s = fs.value.values
        e_phi = cond_expect_cells(sp, t, phi_s)
        conv_s = np.zeros(sp.n_cells(t), bool)
        np.logical_or.at(conv_s, sp.labels(t), ~fs.converged[sp.labels(s)])
        ok = ft.converged & ~conv_s
        imp, mart = tc_equivalence(sp, t, ft.cell_values, phi_s, rng, kind)
        if imp != mart:
            rep.failures.append(Witness(seed, i, 1.0, {"process": V.name, "reason": "implication/martingale mismatch"}))
        rep.trials += 1
        if not np.any(ok):
            rep.inconclusive += 1
            continue
        v = _violation(sign * ft.cell_values[ok] + tl, sign * e_phi[ok])
        if v > 0:
            cell = int(np.flatnonzero(ok)[np.argmax(sign * (e_phi[ok] - ft.cell_values[ok]))])
            rep.failures.append(Witness(seed, i, v, {
                "process": V.name, "t": t, "s": s, "cell": cell,
                "phi_t": float(ft.cell_values[cell]), "E[phi_s|F_t]": float(e_phi[cell])}))
    return rep


def check_supermartingale(index, processes, t: int, s: int, tol=1e-3, seed: int = 0) -> CheckReport:
    """``phi_t >= E[phi_s | F_t] - tol`` on converged cells; ``tol`` may be a function of ``V``."""
    return _martingale_check("super", index, processes, t, s, tol, seed)


def check_submartingale(index, processes, t: int, s: int, tol=1e-3, seed: int = 0) -> CheckReport:
    """``phi_t <= E[phi_s | F_t] + tol`` on converged cells."""
    return _martingale_check("sub", index, processes, t, s, tol, seed)


# -- planted bugs for self-tests ----------------------------------------------

class LeakyAssessor(Assessor):
    """Adds a fraction of the global mean to every cell: breaks locality."""

    builtin = False

    def __init__(self, base: Assessor, leak: float = 1e-3):
        self.base, self.leak = base, leak

    def _cells(self, space, t, rows):
        glob = cond_expect_cells(space, 0, rows)
        return self.base._cells(space, t, rows) + self.leak * glob

    def config(self):
        return {"kind": "leaky", "base": self.base.config()}


class NegatedAssessor(Assessor):
    """``-mu(X)``: anti-monotone."""

    builtin = False

    def __init__(self, base: Assessor):
        self.base = base

    def _cells(self, space, t, rows):
        return -self.base._cells(space, t, rows)

    def config(self):
        return {"kind": "negated", "base": self.base.config()}


def flipped_family(gamma: float) -> Assessor:
    """Entropic family with the sign of gamma reversed: decreasing in gamma."""
    return Entropic(-gamma)


def short_hat(base, t, X):
    """Hat extension truncated after a single level: wrong once ``X < -1``."""
    return _generic_hat(base, t, X, n_max=0)
