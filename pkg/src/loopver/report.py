"""JSON-ready views of analysis results.

Every fraction is rendered as ``"num/den"`` and every mapping is emitted
with sorted keys, so identical inputs give byte-identical reports.
"""

from __future__ import annotations

import json
from typing import Any

from . import __version__
from .aggregator import BalanceReport, FootprintSummary
from .checker import CheckReport, Diagnostic
from .classifier import Verdict
from .errors import LoopverError
from .oracle import DependenceRecord, EquivalenceReport, OracleReport, Race
from .resources import format_frac

SCHEMA_VERSION = 1


def base(command: str, path: str) -> dict[str, Any]:
    return {"tool": "loopver", "version": __version__, "schema": SCHEMA_VERSION,
            "command": command, "input": path}


def input_error(exc: LoopverError | OSError) -> dict[str, Any]:
    if isinstance(exc, LoopverError):
        span = list(exc.span) if exc.span is not None else None
        return {"code": exc.code, "message": exc.message, "span": span}
    return {"code": "FileNotFound" if isinstance(exc, FileNotFoundError) else "IOError",
            "message": str(exc), "span": None}


def diagnostic(d: Diagnostic) -> dict[str, Any]:
    return {"code": d.code, "message": d.message, "span": list(d.span), "region": d.region,
            "cell": d.cell, "statement": d.statement}


def check(report: CheckReport, size_param: str, iter_var: str) -> dict[str, Any]:
    regions = []
    for r in report.regions:
        regions.append({
            "region": r.region.render(iter_var, size_param),
            "passed": r.passed,
            "steps": [{"statement": s.statement, "action": s.action,
                       "cell": s.cell.render(iter_var, size_param),
                       "before": format_frac(s.before), "after": format_frac(s.after)} for s in r.steps],
        })
    return {
        "passed": report.passed,
        "diagnostic": diagnostic(report.diagnostic) if report.diagnostic else None,
        "diagnostics": [diagnostic(d) for d in report.diagnostics],
        "regions": regions,
    }


def footprint(summary: FootprintSummary | None) -> dict[str, Any] | None:
    if summary is None:
        return None
    nv = summary.size_param
    arrays = {
        name: [{"start": s.start.render(nvar=nv), "stop": s.stop.render(nvar=nv), "total": format_frac(s.total)}
               for s in segs]
        for name, segs in summary.arrays.items()
    }
    small = []
    for n in sorted(summary.small):
        table = summary.small[n]
        cells = [{"array": a, "index": j, "total": format_frac(table[a][j])}
                 for a in sorted(table) for j in sorted(table[a])]
        small.append({"n": n, "cells": cells})
    return {"size_param": nv, "symbolic": summary.symbolic, "valid_from": summary.valid_from,
            "empty_below": summary.empty_below, "segments": arrays, "small": small}


def balance(b: BalanceReport, with_footprint: bool = True) -> dict[str, Any]:
    out: dict[str, Any] = {
        "preserving": b.preserving,
        "differing": list(b.differing),
        "error": None,
    }
    if b.error is not None:
        out["error"] = {"code": b.error.code, "message": str(b.error), "side": b.error_side,
                        "cell": str(b.error.cell)}
    if with_footprint:
        out["requires"] = footprint(b.pre)
        out["ensures"] = footprint(b.post)
    return out


def verdict(v: Verdict) -> dict[str, Any]:
    return {
        "kind": v.kind,
        "suggested_pragma": v.suggested_pragma,
        "evidence": [{"site": u.site, "target": u.target, "distance": u.distance, "direction": u.direction}
                     for u in v.evidence],
        "diagnostic": diagnostic(v.diagnostic) if v.diagnostic else None,
    }


def dependence(d: DependenceRecord) -> dict[str, Any]:
    return {"src": d.src_label, "sink": d.sink_label, "kind": d.kind, "distance": d.distance,
            "array": d.array, "direction": d.direction}


def race(r: Race) -> dict[str, Any]:
    return {"first": {"iteration": r.first[0], "statement": r.first[1], "access": r.kinds[0]},
            "second": {"iteration": r.second[0], "statement": r.second[1], "access": r.kinds[1]},
            "cell": f"{r.array}[{r.index}]"}


def equivalence(e: EquivalenceReport) -> dict[str, Any]:
    return {
        "trials": e.trials,
        "equivalent": e.equivalent,
        "cyclic": e.cyclic,
        "mismatches": [{"trial": m.trial, "cells": [f"{a}[{j}]" for a, j in m.cells], "error": m.error}
                       for m in e.mismatches],
        "races": [race(r) for r in e.races],
        "exhaustive": e.exhaustive,
        "extensions": e.extensions,
        "exhaustive_mismatches": e.exhaustive_mismatches,
    }


def oracle(r: OracleReport) -> dict[str, Any]:
    cex = None
    if r.counterexample is not None:
        cex = {"n": r.counterexample["n"], "seed": r.counterexample["seed"]}
        if "error" in r.counterexample:
            cex["error"] = r.counterexample["error"]
        if "dependence" in r.counterexample:
            cex["dependence"] = dependence(r.counterexample["dependence"])
        if "race" in r.counterexample:
            cex["race"] = race(r.counterexample["race"])
    return {
        "verdict": r.verdict,
        "verified": r.verified,
        "n": list(r.n_values),
        "seeds": list(r.seeds),
        "trials": r.trials,
        "observed": [dependence(d) for d in r.observed],
        "agree": r.agree,
        "race_free": r.race_free,
        "equivalent": r.equivalent,
        "runs": [{"n": x.n, "seed": x.seed, "error": x.error,
                  "dependences": [dependence(d) for d in x.dependences],
                  "equivalence": equivalence(x.equivalence) if x.equivalence else None} for x in r.runs],
        "counterexample": cex,
    }


def dumps(report: dict[str, Any], pretty: bool = False) -> str:
    if pretty:
        return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(report, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
