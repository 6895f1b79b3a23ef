import math

import numpy as np
import pytest

from growthlab.growth import EstimatorConfig, rsc
from growthlab.scenarios import (SCENARIOS, ScenarioRecord, ae_mean, dyadic_expected, dyadic_vhat,
                                 fatou_remark_instance, gamma0_counterexamples, gaussian_iid_instance, gaussian_step,
                                 notacc_process, notrej_process, riskseek_neg_process, run_scenario, shrinking_set)


def test_shrinking_set_midpoint_rule():
    N = 16
    assert shrinking_set(N, 1).all()
    assert shrinking_set(N, 2).sum() == 8
    assert shrinking_set(N, 16).tolist() == [True] + [False] * 15
    for T in range(1, N + 1):
        assert shrinking_set(N, T)[0]
        assert np.all(np.diff(shrinking_set(N, T).astype(int)) <= 0)


def test_grid_processes_values():
    V = notacc_process(64)
    inside = shrinking_set(64, 10)
    np.testing.assert_allclose(V.values_at(10)[inside], 0.1, rtol=1e-14)
    np.testing.assert_allclose(V.values_at(10)[~inside], math.exp(10), rtol=1e-14)
    W = notrej_process(64)
    np.testing.assert_allclose(W.values_at(10)[inside], 10 * math.exp(10), rtol=1e-14)
    assert np.all(W.values_at(10)[~inside] == 1.0)
    a, b = gamma0_counterexamples(64)
    assert np.all(a.log_values_at(5)[shrinking_set(64, 5)] == -25.0)
    assert np.all(b.log_values_at(5)[shrinking_set(64, 5)] == 25.0)
    assert V.max_horizon == 64


def test_riskseek_process():
    V = riskseek_neg_process(32)
    lv = V.log_values_at(5)
    assert lv[0] == 5.0 and lv[-1] == -5.0
    np.testing.assert_allclose(V.space.probs[lv < 0].sum(), math.exp(-5), rtol=1e-12)


def test_ae_mean():
    V = notacc_process(16)
    x = np.arange(16.0)
    assert ae_mean(V.space, x) == pytest.approx(np.mean(x[1:]))


def test_dyadic_expected_table():
    np.testing.assert_allclose(dyadic_expected(1, 0.0, 12), [0.25, 0.75])
    np.testing.assert_allclose(dyadic_expected(2, 1.0, 12, corrected=False), [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(dyadic_expected(2, -1.0, 12), np.array([0, 0.25, 0.5, 0.75]) + 2.0 ** -13)


def test_dyadic_small():
    V = dyadic_vhat(8)
    cfg = EstimatorConfig(t_max=800, window=20)
    for t in (0, 1, 2):
        for g in (-1.0, 0.0, 1.0):
            np.testing.assert_allclose(rsc(V, t, g, cfg).cell_values, dyadic_expected(t, g, 8), atol=1e-2)
    with pytest.raises(ValueError):
        dyadic_vhat(1)


@pytest.mark.parametrize("name,params", [
    ("notacc", {"N": 512, "t_max": 500, "window": 20}),
    ("notrej", {"N": 512, "t_max": 500, "window": 20}),
    ("gamma0_a", {"N": 512, "t_max": 500, "window": 20}),
    ("gamma0_b", {"N": 512, "t_max": 500, "window": 20}),
    ("riskseek_neg", {"K": 128, "t_max": 120, "window": 20}),
    ("fatou_remark", {}),
    ("gaussian_iid", {}),
    ("iid_binomial", {}),
])
def test_scenarios_small(name, params):
    res = run_scenario(name, **params)
    assert res.records and res.passed, [r.as_dict() for r in res.records if r.verdict != "pass"]


def test_registry():
    assert set(SCENARIOS) == {"dyadic_vhat", "notacc", "notrej", "gamma0_a", "gamma0_b", "riskseek_neg",
                              "fatou_remark", "gaussian_iid", "iid_binomial"}
    with pytest.raises(KeyError):
        run_scenario("nope")


def test_fatou_instance():
    rep = fatou_remark_instance(4)
    assert rep["direct"] == -math.inf and rep["hat"] == math.inf and rep["hat_converged"]


def test_gaussian_step():
    step = gaussian_step()
    assert step.x.size == 401 and step.x[200] == 0.0
    assert np.array_equal(step.p, step.p[::-1])
    assert math.fsum(step.p * step.x) == pytest.approx(0.0, abs=1e-15)
    res = gaussian_iid_instance(scheme="midquantile", gammas=(1.0,), tol=2e-3)
    assert not res.passed and 3e-3 < res.records[0].gap < 6e-3
    with pytest.raises(ValueError):
        gaussian_step(10)


def test_record_relations():
    assert ScenarioRecord("q", 1.0, 1.0005, "approx", 1e-3, "x").verdict == "pass"
    assert ScenarioRecord("q", 1.0, 0.9, ">=", 0.0, "x").verdict == "fail"
    assert ScenarioRecord("q", math.inf, math.inf, "approx", 0.0, "x").gap == 0.0
    with pytest.raises(ValueError):
        ScenarioRecord("q", 1.0, 1.0, "~", 0.0, "x").verdict
