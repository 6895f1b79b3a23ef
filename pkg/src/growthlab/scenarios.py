"""Reproducible worked example, counterexamples and remarks.

Every scenario builds its processes, runs them through the generic
``rsc``/``dlgi`` pipeline and compares against an expected value or bound.
The grids used for the counterexamples are uniform on [0, 1]; an atom ``j``
of an ``N``-grid belongs to ``[0, 1/T]`` when its midpoint does, i.e.
``(2j + 1) T <= 2N``. Atom 0 stands in for the null point ``omega = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .assessors import Entropic, RiskSeeking, esssup_plus_essinf, hat_eval
from .growth import (EstimatorConfig, StepDistribution, ValueProcess, dlgi, iid_rsc_closed_form, iid_tree_rsc,
                     rsc)
from .space import (FilteredSpace, RandomVariable, cond_expect_cells, dyadic_midpoints, dyadic_space,
                    geometric_grid_space, grid_space)


@dataclass(frozen=True)
class ScenarioRecord:
    """One expected-vs-computed comparison.

    ``relation`` is ``"approx"`` (``|computed - expected| <= tol``), ``">="``
    or ``"<="`` (``computed`` compared with the bound ``expected``).
    """

    quantity: str
    expected: float
    computed: float
    relation: str
    tol: float
    provenance: str
    converged: bool = True

    @property
    def gap(self) -> float:
        if self.computed == self.expected:
            return 0.0
        return abs(self.computed - self.expected)

    @property
    def verdict(self) -> str:
        if self.relation == "approx":
            ok = self.gap <= self.tol
        elif self.relation == ">=":
            ok = self.computed >= self.expected
        elif self.relation == "<=":
            ok = self.computed <= self.expected
        else:
            raise ValueError(self.relation)
        return "pass" if ok else "fail"

    def as_dict(self) -> dict:
        return {"quantity": self.quantity, "relation": self.relation, "expected": self.expected,
                "computed": self.computed, "gap": self.gap, "tol": self.tol, "converged": self.converged,
                "verdict": self.verdict, "provenance": self.provenance}


@dataclass
class ScenarioResult:
    name: str
    params: dict
    records: list[ScenarioRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.verdict == "pass" for r in self.records)

    def add(self, *args, **kw) -> None:
        self.records.append(ScenarioRecord(*args, **kw))


# -- dyadic example ------------------------------------------------------------

def dyadic_vhat(depth: int) -> ValueProcess:
    """``V_T = exp(T E[X | F_min(T,D)])`` with ``X(omega) = omega`` on the dyadic space."""
    if depth < 2:
        raise ValueError("dyadic example needs depth >= 2")
    space = dyadic_space(depth)
    mids = dyadic_midpoints(depth)
    levels = [space.broadcast(cond_expect_cells(space, t, mids), t) for t in range(depth + 1)]
    for a in levels:
        a.flags.writeable = False
    return ValueProcess.from_log(space, lambda T: T * levels[min(T, depth)], name=f"dyadic_vhat(D={depth})")


def dyadic_expected(t: int, gamma: float, depth: int, corrected: bool = True) -> np.ndarray:
    """Limit of the criterion per cell ``i = 1..2^t`` of ``F_t``.

    ``gamma < 0`` picks the infimum of ``X`` on the cell, ``gamma > 0`` the
    supremum, ``gamma = 0`` the mean. With ``corrected`` the extremes are
    replaced by the extreme atom midpoints, which is what a depth-``D`` space
    can resolve (a shift of ``2^-(D+1)``).
    """
    i = np.arange(1, 2 ** t + 1, dtype=float)
    lo, hi = 2 * (i - 1) / 2 ** (t + 1), 2 * i / 2 ** (t + 1)
    shift = 2.0 ** -(depth + 1) if corrected else 0.0
    if gamma < 0:
        return lo + shift
    if gamma > 0:
        return hi - shift
    return (lo + hi) / 2


def scenario_dyadic(depth: int = 12, t_max: int = 2000, window: int = 50, tol: float = 1e-2,
                    times=(0, 1, 2), gammas=(-1.0, 0.0, 1.0)) -> ScenarioResult:
    res = ScenarioResult("dyadic_vhat", {"depth": depth, "t_max": t_max, "window": window, "tol": tol,
                                         "times": list(times), "gammas": list(gammas)})
    V = dyadic_vhat(depth)
    cfg = EstimatorConfig(t_max, window)
    for t in times:
        for g in gammas:
            est = rsc(V, t, g, cfg)
            exp = dyadic_expected(t, g, depth)
            for c, (v, e) in enumerate(zip(est.cell_values, exp)):
                res.add(f"phi[t={t},gamma={g:g},cell={c + 1}]", float(e), float(v), "approx", tol,
                        "three-regime limit table with depth correction", bool(est.converged[c]))
    return res


# -- grid counterexamples -----------------------------------------------------

def shrinking_set(N: int, T: int) -> np.ndarray:
    """Atoms of the uniform ``N``-grid whose midpoint lies in ``[0, 1/T]``."""
    j = np.arange(N, dtype=np.int64)
    return (2 * j + 1) * int(T) <= 2 * int(N)


def _grid_process(N: int, inside: Callable[[int], float], outside: Callable[[int], float], name: str) -> ValueProcess:
    """``ln V_T = inside(T)`` on ``[0, 1/T]``, ``outside(T)`` elsewhere, ``V_0 = 1``; valid for ``T <= N``."""
    if N < 16:
        raise ValueError("grid needs at least 16 atoms")
    space = grid_space(N)
    zero = np.zeros(N)

    def rule(T):
        if T == 0:
            return zero
        return np.where(shrinking_set(N, T), inside(T), outside(T))

    return ValueProcess.from_log(space, rule, max_horizon=N, validate_upto=3, name=name)


def notacc_process(N: int = 4096) -> ValueProcess:
    """``1/T`` on ``[0, 1/T]`` and ``e^T`` elsewhere."""
    return _grid_process(N, lambda T: -math.log(T), lambda T: float(T), f"notacc(N={N})")


def notrej_process(N: int = 4096) -> ValueProcess:
    """``T e^T`` on ``[0, 1/T]`` and ``1`` elsewhere."""
    return _grid_process(N, lambda T: T + math.log(T), lambda T: 0.0, f"notrej(N={N})")


def gamma0_counterexamples(N: int = 4096) -> tuple[ValueProcess, ValueProcess]:
    """``(e^{-T^2} | e^T)`` and ``(e^{T^2} | 1)`` on ``[0, 1/T]`` and its complement."""
    a = _grid_process(N, lambda T: -float(T) ** 2, lambda T: float(T), f"gamma0_a(N={N})")
    b = _grid_process(N, lambda T: float(T) ** 2, lambda T: 0.0, f"gamma0_b(N={N})")
    return a, b


def riskseek_neg_process(K: int = 256) -> ValueProcess:
    """``e^{-T}`` on ``[0, e^{-T}]`` and ``e^T`` elsewhere, on the geometric grid; valid for ``T <= K``."""
    space = geometric_grid_space(K)
    j = np.arange(K + 1)

    def rule(T):
        return np.where(j >= T, -float(T), float(T))

    return ValueProcess.from_log(space, rule, max_horizon=K, validate_upto=3, name=f"riskseek_neg(K={K})")


def ae_mean(space: FilteredSpace, x: np.ndarray, null_atoms=(0,)) -> float:
    """Mean over the atoms outside ``null_atoms`` (renormalized)."""
    keep = np.ones(space.n_atoms, bool)
    keep[list(null_atoms)] = False
    p = space.probs[keep]
    return float(np.sum(p * x[keep]) / p.sum())


def _phi_pair(V, gamma, cfg):
    phi0 = rsc(V, 0, gamma, cfg)
    phi1 = rsc(V, 1, gamma, cfg)
    return phi0, phi1, phi1.value.values


def scenario_notacc(N: int = 4096, t_max: int = 4000, window: int = 50) -> ScenarioResult:
    res = ScenarioResult("notacc", {"grid": N, "t_max": t_max, "window": window, "gamma": -1.0})
    phi0, phi1, p1 = _phi_pair(notacc_process(N), -1.0, EstimatorConfig(t_max, window))
    prov = "counterexample to supermartingale consistency"
    res.add("min phi_1 over atoms != 0", 0.95, float(p1[1:].min()), ">=", 0.0, prov, bool(phi1.converged[1:].all()))
    res.add("phi_0", 0.05, float(phi0.cell_values[0]), "<=", 0.0, prov, bool(phi0.converged[0]))
    viol = float(np.sum(phi1.space.probs * p1)) - float(phi0.cell_values[0])
    res.add("E[phi_1] - phi_0 (supermartingale violation)", 0.9, viol, ">=", 0.0, prov)
    return res


def scenario_notrej(N: int = 4096, t_max: int = 4000, window: int = 50) -> ScenarioResult:
    res = ScenarioResult("notrej", {"grid": N, "t_max": t_max, "window": window, "gamma": 1.0})
    phi0, phi1, p1 = _phi_pair(notrej_process(N), 1.0, EstimatorConfig(t_max, window))
    prov = "counterexample to submartingale consistency"
    res.add("max phi_1 over atoms != 0", 0.05, float(p1[1:].max()), "<=", 0.0, prov, bool(phi1.converged[1:].all()))
    res.add("phi_0", 0.95, float(phi0.cell_values[0]), ">=", 0.0, prov, bool(phi0.converged[0]))
    viol = float(phi0.cell_values[0]) - float(np.sum(phi1.space.probs * p1))
    res.add("phi_0 - E[phi_1] (submartingale violation)", 0.9, viol, ">=", 0.0, prov)
    return res


def scenario_gamma0_a(N: int = 4096, t_max: int = 4000, window: int = 50) -> ScenarioResult:
    """Supermartingale failure at ``gamma = 0`` and the positive-part mismatch at ``gamma = 0``.

    ``phi_1 = -T`` on atom 0, which carries mass ``1/N`` on the grid; the
    comparison uses the expectation over the remaining atoms.
    """
    res = ScenarioResult("gamma0_a", {"grid": N, "t_max": t_max, "window": window, "gamma": 0.0})
    V, _ = gamma0_counterexamples(N)
    cfg = EstimatorConfig(t_max, window)
    phi0, phi1, p1 = _phi_pair(V, 0.0, cfg)
    prov = "derived by direct evaluation on the grid"
    f0 = float(phi0.cell_values[0])
    res.add("min phi_1 over atoms != 0", 0.95, float(p1[1:].min()), ">=", 0.0, prov)
    res.add("phi_0", 0.05, f0, "<=", 0.0, prov, bool(phi0.converged[0]))
    res.add("E_ae[phi_1] - phi_0 (supermartingale violation)", 0.9, ae_mean(V.space, p1) - f0, ">=", 0.0, prov)
    rs = dlgi(V, 0, RiskSeeking(Entropic(0.0)), cfg)
    res.add("[phi_0]^+", 0.05, max(f0, 0.0), "<=", 0.0, prov)
    res.add("risk-seeking index at t=0", 0.9, float(rs.cell_values[0]), ">=", 0.0, prov, bool(rs.converged[0]))
    return res


def scenario_gamma0_b(N: int = 4096, t_max: int = 4000, window: int = 50) -> ScenarioResult:
    res = ScenarioResult("gamma0_b", {"grid": N, "t_max": t_max, "window": window, "gamma": 0.0})
    _, V = gamma0_counterexamples(N)
    phi0, phi1, p1 = _phi_pair(V, 0.0, EstimatorConfig(t_max, window))
    prov = "derived by direct evaluation on the grid"
    f0 = float(phi0.cell_values[0])
    res.add("max phi_1 over atoms != 0", 0.05, float(p1[1:].max()), "<=", 0.0, prov)
    res.add("phi_0", 0.9, f0, ">=", 0.0, prov, bool(phi0.converged[0]))
    res.add("phi_0 - E_ae[phi_1] (submartingale violation)", 0.9, f0 - ae_mean(V.space, p1), ">=", 0.0, prov)
    return res


def scenario_riskseek_neg(K: int = 256, t_max: int = 200, window: int = 50) -> ScenarioResult:
    """Positive part of the criterion at ``gamma = -1`` differs from the risk-seeking index."""
    res = ScenarioResult("riskseek_neg", {"k": K, "t_max": t_max, "window": window, "gamma": -1.0})
    V = riskseek_neg_process(K)
    cfg = EstimatorConfig(t_max, window)
    phi0 = rsc(V, 0, -1.0, cfg)
    rs = dlgi(V, 0, RiskSeeking(Entropic(-1.0)), cfg)
    prov = "derived: -(1/T) ln(1 + ...) vs 1 - ln 2 / T"
    res.add("[phi_0]^+", 0.05, max(float(phi0.cell_values[0]), 0.0), "<=", 0.0, prov, bool(phi0.converged[0]))
    res.add("risk-seeking index at t=0", 0.95, float(rs.cell_values[0]), ">=", 0.0, prov, bool(rs.converged[0]))
    return res


# -- remarks ------------------------------------------------------------------

def fatou_remark_instance(n_atoms: int = 3) -> dict:
    """``f(X) = esssup X + essinf X`` at ``X = (+inf, -inf, 0, ..)``: direct vs hat value."""
    if n_atoms < 2:
        raise ValueError("need at least 2 atoms")
    space = FilteredSpace(np.full(n_atoms, 1.0 / n_atoms), [np.zeros(n_atoms, dtype=np.int64)])
    x = np.zeros(n_atoms)
    x[0], x[1] = np.inf, -np.inf
    X = RandomVariable(space, x)
    f = esssup_plus_essinf()
    direct = float(f.evaluate(0, X).values[0])
    hat = hat_eval(f, 0, X)
    return {"space": space, "X": X, "direct": direct, "hat": float(hat.value.values[0]),
            "hat_converged": bool(hat.converged.all())}


def scenario_fatou(n_atoms: int = 3) -> ScenarioResult:
    res = ScenarioResult("fatou_remark", {"atoms": n_atoms})
    rep = fatou_remark_instance(n_atoms)
    prov = "remark on the missing Fatou property"
    res.add("direct f_0(X)", -math.inf, rep["direct"], "approx", 0.0, prov)
    res.add("hat f_0(X)", math.inf, rep["hat"], "approx", 0.0, prov)
    return res


def gaussian_step(K: int = 401, scheme: str = "density", half_width: float = 8.0) -> StepDistribution:
    """``K``-point symmetric quantization of N(0, 1) with an exact 0 in the middle.

    ``"density"``: equally spaced points on ``[-L, L]`` weighted by the normal
    density (accurate for exponential moments). ``"midquantile"``: equally
    weighted points ``Phi^-1((k + 1/2)/K)``; it understates the variance, so
    ``(1/gamma) ln E e^{gamma X}`` misses ``gamma/2`` by about ``4.5e-3`` at
    ``|gamma| = 1`` for ``K = 401``.
    """
    if K < 3 or K % 2 == 0:
        raise ValueError("K must be odd and >= 3")
    h = K // 2
    if scheme == "density":
        right = half_width * np.arange(1, h + 1) / h
        x = np.r_[-right[::-1], 0.0, right]
        lw = -0.5 * x ** 2
        p = np.exp(lw - logsumexp(lw))
    elif scheme == "midquantile":
        right = norm.ppf((np.arange(h + 1, K) + 0.5) / K)
        x = np.r_[-right[::-1], 0.0, right]
        p = np.full(K, 1.0 / K)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    p = (p + p[::-1]) / 2  # exact symmetry
    return StepDistribution(x, p / math.fsum(p))


def gaussian_iid_instance(K: int = 401, gammas=(-1.0, -0.5, 0.0, 0.5, 1.0), scheme: str = "density",
                          tol: float = 2e-3) -> ScenarioResult:
    res = ScenarioResult("gaussian_iid", {"k": K, "scheme": scheme, "gammas": list(gammas), "tol": tol})
    step = gaussian_step(K, scheme)
    for g in gammas:
        res.add(f"phi[gamma={g:g}]", g / 2, iid_rsc_closed_form(step, g), "approx", 0.0 if g == 0 else tol,
                "closed form gamma/2 for Gaussian i.i.d. log-returns")
    return res


def scenario_iid_binomial(sigmas=(0.5, 1.0), gammas=(-1.0, -0.5, 0.5, 1.0), T: int = 6, tol: float = 1e-12) -> ScenarioResult:
    res = ScenarioResult("iid_binomial", {"sigmas": list(sigmas), "gammas": list(gammas), "tree_T": T, "tol": tol})
    for s in sigmas:
        step = StepDistribution.binomial(s)
        for g in gammas:
            cf = iid_rsc_closed_form(step, g)
            res.add(f"closed form vs tree [sigma={s:g},gamma={g:g}]", iid_tree_rsc(step, g, T), cf, "approx", tol,
                    "brute-force tree enumeration")
            res.add(f"closed form vs ln cosh [sigma={s:g},gamma={g:g}]", math.log(math.cosh(g * s)) / g, cf,
                    "approx", tol, "derived closed form")
    return res


SCENARIOS: dict[str, Callable[..., ScenarioResult]] = {
    "dyadic_vhat": scenario_dyadic,
    "notacc": scenario_notacc,
    "notrej": scenario_notrej,
    "gamma0_a": scenario_gamma0_a,
    "gamma0_b": scenario_gamma0_b,
    "riskseek_neg": scenario_riskseek_neg,
    "fatou_remark": scenario_fatou,
    "gaussian_iid": gaussian_iid_instance,
    "iid_binomial": scenario_iid_binomial,
}


def run_scenario(name: str, **params) -> ScenarioResult:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    return SCENARIOS[name](**params)
