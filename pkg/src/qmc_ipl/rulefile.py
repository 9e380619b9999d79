"""JSON persistence for constructed rules."""

from __future__ import annotations

import json
import math
from pathlib import Path

from . import __version__
from .cbc import CbcResult, TraceStep
from .criterion import B_u, WeightProfile, wce_bound
from .errors import InvalidRuleError
from .gfpoly import GFPolynomial
from .lattice import RuleSpec

__all__ = ["SCHEMA_VERSION", "rule_to_json", "rule_from_json", "save_rule", "load_rule"]

SCHEMA_VERSION = 1
RECHECK_RTOL = 1e-10


def rule_to_json(result: CbcResult) -> dict:
    spec = result.spec
    crit = wce_bound(spec, B=result.B_u)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "b": spec.b,
        "m": spec.m,
        "s": spec.s,
        "d": spec.d,
        "weights": spec.weights.to_json(),
        "p": spec.p.enc,
        "q": [qj.enc for qj in spec.q],
        "mode": result.mode,
        "trace": [{"tau": t.tau, "q": t.q, "B_u": t.B_u} for t in result.trace],
        "B_u": result.B_u,
        "wce_bound": crit.wce_bound,
    }


def rule_from_json(obj: dict, recheck: bool = True) -> CbcResult:
    """Rebuild a rule, re-validating its invariants and (optionally) the
    recorded final B_u against a fresh evaluation."""
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise InvalidRuleError(f"unsupported schema version {obj.get('schema_version')!r}")
    try:
        b, m, s, d = (int(obj[k]) for k in ("b", "m", "s", "d"))
        weights = WeightProfile.from_json(obj["weights"])
        p = GFPolynomial.from_int(b, int(obj["p"]))
        q = tuple(GFPolynomial.from_int(b, int(e)) for e in obj["q"])
        trace = [TraceStep(int(t["tau"]), int(t["q"]), float(t["B_u"])) for t in obj["trace"]]
        mode = str(obj["mode"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidRuleError(f"malformed rule file: {exc}") from exc
    spec = RuleSpec(b, m, s, d, p, q, weights)
    if [t.q for t in trace] != [qj.enc for qj in q]:
        raise InvalidRuleError("trace does not match the generating vector")
    if recheck:
        recorded = trace[-1].B_u
        fresh = B_u(spec)
        if not math.isclose(fresh, recorded, rel_tol=RECHECK_RTOL, abs_tol=1e-300):
            raise InvalidRuleError(f"recorded B_u {recorded!r} disagrees with recomputed {fresh!r}")
    return CbcResult(spec, trace, mode)


def save_rule(result: CbcResult, path) -> None:
    Path(path).write_text(json.dumps(rule_to_json(result), indent=2) + "\n")


def load_rule(path, recheck: bool = True) -> CbcResult:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidRuleError(f"{path}: not valid JSON ({exc})") from exc
    return rule_from_json(obj, recheck)
