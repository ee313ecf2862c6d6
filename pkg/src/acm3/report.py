"""Deterministic text and JSON rendering of verification reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .checks import CheckResult


@dataclass
class VerificationReport:
    manifold: str
    n: int
    seed: int
    order: int
    conventions: dict
    checks: list = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def summary(self) -> dict:
        passed = sum(1 for c in self.checks if c.passed)
        return {"passed": passed, "failed": len(self.checks) - passed, "total": len(self.checks)}

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


class _Float:
    """Float rendered with a fixed format by :func:`to_json`."""

    def __init__(self, value: float):
        self.value = value


def _fmt(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.12e" % x


def _check_dict(c: CheckResult) -> dict:
    return {
        "id": c.id,
        "description": c.description,
        "paper_ref": c.paper_ref,
        "max_residual": _Float(c.max_residual),
        "tolerance": _Float(c.tolerance),
        "pass": c.passed,
        "points_sampled": c.points_sampled,
    }


def _render(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, _Float):
        return _fmt(obj.value)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_render(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [inner + _render(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj)


def to_json(report: VerificationReport) -> str:
    doc = {
        "manifold": report.manifold,
        "n": report.n,
        "seed": report.seed,
        "order": report.order,
        "conventions": {k: report.conventions[k] for k in ("wedge", "matrix_reading", "quaternion_side")},
        "checks": [_check_dict(c) for c in report.checks],
        "summary": report.summary,
        "elapsed_ms": _Float(float(report.elapsed_ms)),
    }
    return _render(doc, 0) + "\n"


def check_line(c: CheckResult) -> str:
    status = "PASS" if c.passed else "FAIL"
    return f"{status}  {c.id}  max_residual={c.max_residual:.3e}  tol={c.tolerance:.1e}  ({c.paper_ref})"


def to_text(report: VerificationReport) -> str:
    lines = [
        f"# manifold={report.manifold} n={report.n} seed={report.seed} order={report.order}",
        *(f"# {k}: {report.conventions[k]}" for k in ("wedge", "matrix_reading", "quaternion_side")),
    ]
    for c in report.checks:
        lines.append(check_line(c))
        if c.error:
            lines.append(f"#   error in {c.id}: {c.error}")
    s = report.summary
    lines.append(f"# summary: passed={s['passed']} failed={s['failed']} total={s['total']} elapsed_ms={report.elapsed_ms:.0f}")
    return "\n".join(lines) + "\n"


__all__ = ["VerificationReport", "check_line", "to_json", "to_text"]
