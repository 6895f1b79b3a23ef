"""``growthlab`` command line.

Exit codes: 0 when every expectation is met (expected failures of
counterexamples included), 1 on an unexpected result, 2 on usage, file or
validation errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from . import __version__, kernels
from .assessors import Assessor, Entropic, assessor_from_config
from .errors import GrowthlabError
from .growth import EstimatorConfig, check_enough1, dlgi, iid_rsc_closed_form, rsc
from .io import IidSpec, load_json, process_from_dict, render, space_from_dict

EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("GROWTHLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _pmap(fn: Callable, items: Sequence) -> list:
    """Map in a thread pool; results come back in input order."""
    n = min(_threads(), len(items)) or 1
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _metadata() -> dict:
    return {"version": __version__, "backend": kernels.BACKEND,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}


def _emit(args, records: list[dict], config: dict) -> None:
    text = render(records, args.format, config, _metadata() if args.format == "json" else None)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- eval ---------------------------------------------------------------------

def cmd_eval(args) -> int:
    cfg = EstimatorConfig(args.tmax, args.window, args.tol)
    times = args.t or [0]
    if any(t < 0 for t in times):
        raise UsageError("--t must be nonnegative")
    if any(cfg.t_max <= t for t in times):
        raise UsageError(f"--tmax {cfg.t_max} must exceed every --t")
    if any(cfg.t_max - t <= cfg.window for t in times):
        raise UsageError("--window must be smaller than tmax - t")
    if args.assessor and args.gamma:
        raise UsageError("give either --assessor or --gamma, not both")
    space = space_from_dict(load_json(args.space)) if args.space else None
    proc = process_from_dict(load_json(args.process), space)
    mu: Assessor | None = assessor_from_config(args.assessor) if args.assessor else None
    gammas = args.gamma or ([] if mu else [0.0])
    config = {"command": "eval", "process": args.process, "space": args.space, "t": times,
              "assessor": mu.config() if mu else None, "gamma": gammas, **cfg.as_dict()}

    if isinstance(proc, IidSpec):
        if mu is not None and not isinstance(mu, Entropic):
            raise UsageError("i.i.d. processes support only the entropic family")
        gs = [mu.gamma] if mu is not None else gammas
        records = [{"t": t, "gamma": g, "cell": 0, "value": iid_rsc_closed_form(proc.step, g),
                    "converged": True, "tail_spread": 0.0} for t in times for g in gs]
        _emit(args, records, config)
        return EXIT_OK

    if mu is not None:
        items = [(t, None) for t in times]
    else:
        items = [(t, g) for t in times for g in gammas]

    def work(item):
        t, g = item
        est = dlgi(proc, t, mu, cfg) if g is None else rsc(proc, t, g, cfg)
        key = {"t": t} if g is None else {"t": t, "gamma": g}
        return [{**key, **r} for r in est.records()]

    records = [r for chunk in _pmap(work, items) for r in chunk]
    _emit(args, records, config)
    return EXIT_OK


# -- scenario -------------------------------------------------------------------

SCENARIO_FLAGS = {
    "dyadic_vhat": {"depth": "depth", "tmax": "t_max", "window": "window", "tol": "tol"},
    "notacc": {"grid": "N", "tmax": "t_max", "window": "window"},
    "notrej": {"grid": "N", "tmax": "t_max", "window": "window"},
    "gamma0_a": {"grid": "N", "tmax": "t_max", "window": "window"},
    "gamma0_b": {"grid": "N", "tmax": "t_max", "window": "window"},
    "riskseek_neg": {"grid": "K", "tmax": "t_max", "window": "window"},
    "fatou_remark": {},
    "gaussian_iid": {"grid": "K", "tol": "tol"},
    "iid_binomial": {},
}


def cmd_scenario(args) -> int:
    from .scenarios import SCENARIOS, run_scenario

    names = sorted(SCENARIOS) if args.name == "all" else [args.name]
    for n in names:
        if n not in SCENARIOS:
            raise UsageError(f"unknown scenario {n!r}; known: {', '.join(sorted(SCENARIOS))}")

    def params_for(name):
        return {dest: getattr(args, flag) for flag, dest in SCENARIO_FLAGS[name].items()
                if getattr(args, flag) is not None}

    results = _pmap(lambda n: run_scenario(n, **params_for(n)), names)
    records = []
    for res in results:
        for r in res.records:
            records.append({"scenario": res.name, "params": res.params, **r.as_dict()})
    config = {"command": "scenario", "names": names,
              "overrides": {n: params_for(n) for n in names}}
    _emit(args, records, config)
    return EXIT_OK if all(r.passed for r in results) else EXIT_UNEXPECTED


# -- props --------------------------------------------------------------------

PROPERTIES = ("locality", "monotonicity", "cash_additivity", "strong_tc", "assessor_martingale",
              "quasiconcavity", "scale_invariance", "gamma_monotonicity", "timeconsistency_equivalence",
              "hat_bounded", "enough1", "index_locality", "index_monotonicity")


def _expected_pass(prop: str, mu: Assessor) -> bool:
    """What theory predicts for ``prop`` with ``mu``."""
    if prop == "strong_tc":
        return mu.kind == "entropic"
    if prop == "cash_additivity":
        return mu.cash_additive
    if prop in ("quasiconcavity", "enough1"):
        return mu.satisfies_enough1 and mu.cash_additive
    return True


def run_property(prop: str, mu: Assessor, trials: int, seed: int, tol: float | None = None):
    from . import proplab as pl
    from .growth import EstimatorConfig as Cfg
    from .proplab import CheckReport, GrowthIndex, InstanceGen, Witness

    gen = InstanceGen(seed=seed)
    kw = {} if tol is None else {"tol": tol}
    if prop == "locality":
        return pl.check_local(mu, gen, trials)
    if prop == "index_locality":
        return pl.check_local(GrowthIndex(mu), gen, trials)
    if prop == "monotonicity":
        return pl.check_monotone(mu, gen, trials, **kw)
    if prop == "index_monotonicity":
        return pl.check_monotone(GrowthIndex(mu, normalize=False), gen, trials, **kw)
    if prop == "cash_additivity":
        return pl.check_cash_additive(mu, gen, trials, **kw)
    if prop == "strong_tc":
        return pl.check_strong_tc(mu, gen, trials, **kw)
    if prop == "assessor_martingale":
        if not isinstance(mu, Entropic):
            raise UsageError("assessor_martingale needs an entropic assessor")
        return pl.check_assessor_martingale(mu.gamma, gen, trials, **kw)
    if prop == "quasiconcavity":
        return pl.check_quasiconcave_corrected(mu, gen, trials, **kw)
    if prop == "scale_invariance":
        return pl.check_scale_invariant(GrowthIndex(mu), gen, trials)
    if prop == "gamma_monotonicity":
        return pl.check_gamma_monotone_random(gen, trials)
    if prop == "timeconsistency_equivalence":
        return pl.check_tc_equivalence(gen, trials)
    if prop == "hat_bounded":
        return pl.check_hat_bounded(mu, gen, trials)
    if prop == "enough1":
        rep = CheckReport("enough1")
        cfg = Cfg(t_max=400, window=50)
        for k in range(trials):
            inst = pl.gen_instance(gen, k)
            r = check_enough1(inst.processes[0], inst.t, mu, cfg, tol)
            rep.trials += 1
            if not r.passed:
                rep.failures.append(Witness(seed, k, float(r.gap.max()), {"t": inst.t, "bound": r.bound}))
        return rep
    raise UsageError(f"unknown property {prop!r}; known: {', '.join(PROPERTIES)}")


def cmd_props(args) -> int:
    campaigns = []
    if args.config:
        doc = load_json(args.config)
        items = doc.get("campaigns", [doc]) if isinstance(doc, dict) else doc
        for c in items:
            if "property" not in c:
                raise UsageError("campaign entry needs 'property'")
            campaigns.append({"property": c["property"], "assessor": c.get("assessor", "entropic:-1"),
                              "trials": int(c.get("trials", 200)), "seed": int(c.get("seed", 0)),
                              "tol": c.get("tol")})
    else:
        if not args.property:
            raise UsageError("props needs --property or --config")
        props = list(PROPERTIES) if args.property == ["all"] else args.property
        for p in props:
            campaigns.append({"property": p, "assessor": args.assessor or "entropic:-1",
                              "trials": args.trials, "seed": args.seed, "tol": args.tol})
    for c in campaigns:
        if c["trials"] < 1:
            raise UsageError("trials must be >= 1")
        if c["property"] not in PROPERTIES:
            raise UsageError(f"unknown property {c['property']!r}; known: {', '.join(PROPERTIES)}")
        c["assessor"] = assessor_from_config(c["assessor"]).config()

    def work(c):
        mu = assessor_from_config(c["assessor"])
        rep = run_property(c["property"], mu, c["trials"], c["seed"], c["tol"])
        expected = "pass" if _expected_pass(c["property"], mu) else "fail"
        d = rep.as_dict()
        # an expected failure that finds no witness is not an error: the property is merely not guaranteed
        unexpected = expected == "pass" and d["verdict"] == "fail"
        return {"property": c["property"], "assessor": c["assessor"], "seed": c["seed"],
                "expected": expected, **{k: v for k, v in d.items() if k != "property"},
                "unexpected": unexpected}

    records = _pmap(work, campaigns)
    _emit(args, records, {"command": "props", "campaigns": campaigns})
    return EXIT_UNEXPECTED if any(r["unexpected"] for r in records) else EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="growthlab", description="Dynamic limit growth indices and risk sensitive criteria.")
    p.add_argument("--version", action="version", version=f"growthlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("table", "csv", "json"), default="table")
        sp.add_argument("--out", help="write output to this file instead of stdout")

    e = sub.add_parser("eval", help="evaluate the index on a process file")
    e.add_argument("--process", required=True)
    e.add_argument("--space")
    e.add_argument("--assessor", help="e.g. entropic:-1, neg_avar:0.5, ce:power:0.5 or JSON")
    e.add_argument("--gamma", type=float, action="append")
    e.add_argument("--t", type=int, action="append")
    e.add_argument("--tmax", type=int, default=2000)
    e.add_argument("--window", type=int, default=50)
    e.add_argument("--tol", type=float, default=1e-3)
    common(e)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("scenario", help="reproduce a worked example or counterexample")
    s.add_argument("name", help="scenario name or 'all'")
    s.add_argument("--depth", type=int)
    s.add_argument("--grid", type=int)
    s.add_argument("--tmax", type=int)
    s.add_argument("--window", type=int)
    s.add_argument("--tol", type=float)
    common(s)
    s.set_defaults(func=cmd_scenario)

    q = sub.add_parser("props", help="run property campaigns")
    q.add_argument("--property", action="append", help="property name (repeatable) or 'all'")
    q.add_argument("--assessor")
    q.add_argument("--trials", type=int, default=200)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tol", type=float)
    q.add_argument("--config", help="campaign JSON file")
    common(q)
    q.set_defaults(func=cmd_props)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"growthlab: usage error: {exc}", file=sys.stderr)
    except GrowthlabError as exc:
        print(f"growthlab: {type(exc).__name__}: {exc}", file=sys.stderr)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"growthlab: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
