"""Acceptance criteria 1-9.

Each test records one ``CRITERION n: PASS|FAIL`` line; the lines are printed
in the pytest terminal summary and when this file is run as a script.
"""

import math
import time

import numpy as np
import pytest

from growthlab.assessors import Entropic, NegAVaR
from growthlab.growth import EstimatorConfig, StepDistribution, check_enough1, iid_rsc_closed_form, iid_tree_rsc
from growthlab.proplab import (GrowthIndex, InstanceGen, check_assessor_martingale, check_cash_additive,
                               check_gamma_monotone_random, check_hat_bounded, check_local, check_monotone,
                               check_quasiconcave_corrected, check_scale_invariant, check_strong_tc,
                               check_tc_equivalence, gen_instance)
from growthlab.scenarios import (fatou_remark_instance, gaussian_iid_instance, scenario_dyadic, scenario_notacc,
                                 scenario_notrej)

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def _worst(res):
    bad = [r for r in res.records if r.verdict != "pass"]
    return bad, max((r.gap for r in res.records if r.relation == "approx"), default=0.0)


def test_criterion_1_dyadic_table():
    t0 = time.perf_counter()
    res = scenario_dyadic(depth=12, t_max=2000, window=50, tol=1e-2, times=(0, 1, 2), gammas=(-1.0, 0.0, 1.0))
    secs = time.perf_counter() - t0
    bad, worst = _worst(res)
    record(1, not bad and len(res.records) == 3 * 7 and secs < 60,
           f"dyadic D=12: {len(res.records)} cells, max |gap| {worst:.2e} <= 1e-2, {secs:.1f}s")


def _bounds(res):
    return ", ".join(f"{r.quantity} = {r.computed:.4f} ({r.relation} {r.expected})" for r in res.records)


def test_criterion_2_notacc():
    res = scenario_notacc(N=4096, t_max=4000, window=50)
    record(2, res.passed, _bounds(res))


def test_criterion_3_notrej():
    res = scenario_notrej(N=4096, t_max=4000, window=50)
    record(3, res.passed, _bounds(res))


def test_criterion_4_iid_oracles():
    worst = 0.0
    for sigma in (0.5, 1.0):
        step = StepDistribution.binomial(sigma)
        for g in (-1.0, -0.5, 0.5, 1.0):
            cf = iid_rsc_closed_form(step, g)
            worst = max(worst, abs(cf - iid_tree_rsc(step, g, 6)), abs(cf - math.log(math.cosh(g * sigma)) / g))
    record(4, worst <= 1e-12, f"closed form vs tree (T=6) and ln cosh: max |gap| {worst:.1e} <= 1e-12")


def test_criterion_5_gaussian():
    res = gaussian_iid_instance(K=401, gammas=(-1.0, -0.5, 0.0, 0.5, 1.0), tol=2e-3)
    zero = [r for r in res.records if r.quantity == "phi[gamma=0]"][0]
    worst = max(r.gap for r in res.records)
    record(5, res.passed and zero.computed == 0.0,
           f"401-point N(0,1): max |phi - gamma/2| {worst:.1e} <= 2e-3, gamma=0 gives {zero.computed!r}")


def test_criterion_6_axiom_suites():
    gen = InstanceGen(seed=2024)
    n = 200
    t0 = time.perf_counter()
    reports = [
        check_scale_invariant(GrowthIndex(Entropic(1.0)), gen, n),
        check_scale_invariant(GrowthIndex(NegAVaR(0.3)), gen, n),
        check_local(Entropic(-1.0), gen, n),
        check_local(NegAVaR(0.5), gen, n),
        check_local(GrowthIndex(Entropic(0.5)), gen, n),
        check_monotone(GrowthIndex(Entropic(-1.0), normalize=False), gen, n),
        check_monotone(GrowthIndex(Entropic(1.0), normalize=False), gen, n),
        check_quasiconcave_corrected(Entropic(-1.0), gen, n),
        check_quasiconcave_corrected(Entropic(1.0), gen, n),
        check_gamma_monotone_random(gen, n),
        check_tc_equivalence(gen, n),
    ]
    for g in (-1.0, 0.0, 1.0):
        reports.append(check_cash_additive(Entropic(g), gen, n, tol=1e-12))
        reports.append(check_strong_tc(Entropic(g), gen, n, tol=1e-12))
        reports.append(check_assessor_martingale(g, gen, n, tol=1e-12))
    secs = time.perf_counter() - t0
    failed = [f"{r.name}({len(r.failures)})" for r in reports if r.failures or r.trials != n]
    record(6, not failed and secs < 60,
           f"{len(reports)} suites x {n} trials, failures: {failed or 'none'}, {secs:.1f}s")


def test_criterion_7_fatou_and_bounded_hat():
    rep = fatou_remark_instance(3)
    gen = InstanceGen(seed=77)
    suites = [check_hat_bounded(mu, gen, 50) for mu in (Entropic(-1.0), Entropic(1.0), NegAVaR(0.25))]
    failures = sum(len(r.failures) for r in suites)
    ok = rep["direct"] == -math.inf and rep["hat"] == math.inf and rep["hat_converged"] and failures == 0
    record(7, ok, f"direct f0 = {rep['direct']}, hat f0 = {rep['hat']}; bounded hat == direct on "
                  f"{sum(r.trials for r in suites)} instances, {failures} mismatches")


def test_criterion_8_enough1():
    gen = InstanceGen(seed=8)
    cfg = EstimatorConfig(t_max=400, window=50)
    worst_ratio, fails, checked = 0.0, 0, 0
    for k in range(50):
        inst = gen_instance(gen, k)
        V = inst.processes[0]
        assert V.v_tilde
        for g in (-1.0, 0.0, 1.0):
            r = check_enough1(V, inst.t, Entropic(g), cfg)
            checked += 1
            fails += not r.passed
            if r.bound > 0:
                worst_ratio = max(worst_ratio, float(r.gap.max()) / r.bound)
    record(8, fails == 0, f"{checked} checks on 50 strictly positive instances, max gap/bound {worst_ratio:.3f}")


def test_criterion_9_strong_tc_witness():
    gen = InstanceGen(seed=0)
    rep = check_strong_tc(NegAVaR(0.5), gen, 500)
    ok = bool(rep.failures)
    detail = "no witness in 500 trials"
    if ok:
        w = rep.failures[0]
        replay = check_strong_tc(NegAVaR(0.5), InstanceGen(seed=w.seed), 1, first_trial=w.trial)
        again = check_strong_tc(NegAVaR(0.5), InstanceGen(seed=w.seed), 1, first_trial=w.trial)
        ok = (len(replay.failures) == 1 and replay.failures[0].magnitude == w.magnitude
              and again.failures[0].magnitude == w.magnitude)
        detail = (f"neg_avar(0.5) witness at seed {w.seed} trial {w.trial} (t={w.detail['t']}, s={w.detail['s']}, "
                  f"violation {w.magnitude:.3e}), replay {'identical' if ok else 'differs'}")
    record(9, ok, detail)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
