"""File formats: spaces, processes and result records."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .errors import ConfigError, GrowthlabError
from .extreal import format_ext, parse_ext
from .growth import StepDistribution, ValueProcess, explicit_value_process
from .space import FilteredSpace, build_space


def load_json(path: str | Path) -> Any:
    """Read JSON, reporting the line and column of syntax errors."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def space_from_dict(d: dict) -> FilteredSpace:
    if not isinstance(d, dict) or "atoms" not in d or "partitions" not in d:
        raise ConfigError("space needs 'atoms' and 'partitions'")
    try:
        atoms = [(a["id"], float(a["p"])) for a in d["atoms"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad atom entry: {exc}") from exc
    return build_space(atoms, d["partitions"])


@dataclass(frozen=True)
class IidSpec:
    step: StepDistribution
    v0: float = 1.0


def process_from_dict(d: dict, space: FilteredSpace | None = None) -> ValueProcess | IidSpec:
    """Parse a process description.

    ``explicit``: ``values`` is a list over ``t`` of per-atom lists (atom order
    of the space file), ``tail`` is ``"hold"`` or ``"linear"``. ``iid``: ``v0``
    and ``step`` as ``[{"x", "p"}]``. ``builtin``: a named construction with
    optional ``params``.
    """
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("process needs a 'kind'")
    kind = d["kind"]
    if kind == "explicit":
        if space is None:
            raise ConfigError("explicit process needs --space")
        try:
            values = [[parse_ext(v) for v in row] for row in d["values"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad explicit values: {exc}") from exc
        return explicit_value_process(space, values, d.get("tail", "hold"), d.get("name", "explicit"))
    if kind == "iid":
        try:
            step = StepDistribution.from_pairs((float(s["x"]), float(s["p"])) for s in d["step"])
            v0 = float(d.get("v0", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad iid step: {exc}") from exc
        if not v0 > 0:
            raise ConfigError("iid v0 must be positive")
        return IidSpec(step, v0)
    if kind == "builtin":
        from . import scenarios

        builders = {
            "dyadic_vhat": lambda p: scenarios.dyadic_vhat(int(p.get("depth", 12))),
            "notacc": lambda p: scenarios.notacc_process(int(p.get("grid", 4096))),
            "notrej": lambda p: scenarios.notrej_process(int(p.get("grid", 4096))),
            "gamma0_a": lambda p: scenarios.gamma0_counterexamples(int(p.get("grid", 4096)))[0],
            "gamma0_b": lambda p: scenarios.gamma0_counterexamples(int(p.get("grid", 4096)))[1],
            "riskseek_neg": lambda p: scenarios.riskseek_neg_process(int(p.get("k", 256))),
        }
        name = d.get("name")
        if name not in builders:
            raise ConfigError(f"unknown builtin process {name!r}; known: {', '.join(sorted(builders))}")
        return builders[name](d.get("params", {}))
    raise ConfigError(f"unknown process kind {kind!r}")


# -- records ------------------------------------------------------------------

def _cell(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return format_ext(v + 0.0)  # drop the sign of -0.0
    return v


def clean_record(rec: dict) -> dict:
    return {k: _cell(v) for k, v in rec.items()}


def render(records: list[dict], fmt: str, config: dict, metadata: dict | None = None) -> str:
    recs = [clean_record(r) for r in records]
    if fmt == "json":
        doc = {"config": config, "records": recs}
        if metadata is not None:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    cols = _columns(recs)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in recs:
            w.writerow({k: _text(r.get(k)) for k in cols})
        return buf.getvalue()
    if fmt == "table":
        rows = [[_text(r.get(k)) for k in cols] for r in recs]
        widths = [max([len(c)] + [len(row[i]) for row in rows]) for i, c in enumerate(cols)]
        lines = ["# config: " + json.dumps(config, sort_keys=True)]
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
        return "\n".join(lines) + "\n"
    raise GrowthlabError(f"unknown format {fmt!r}")


def _columns(recs: Iterable[dict]) -> list[str]:
    cols: list[str] = []
    for r in recs:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def _text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)
