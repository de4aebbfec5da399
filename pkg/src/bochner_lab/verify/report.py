"""Check results, reports and their JSON form."""
from __future__ import annotations

import json
import math
import platform
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

SUITE_VERSION = "1.0"


def _clean(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class CheckResult:
    check: str
    manifold: str
    values: dict
    tolerance: float
    passed: bool
    resolution: int | None = None
    seed: int = 0
    millis: int = 0
    applicable: bool = True
    note: str = ""

    def to_json(self) -> dict:
        return {
            "suite_version": SUITE_VERSION,
            "manifold": self.manifold,
            "check": self.check,
            "values": {k: _clean(v) for k, v in self.values.items()},
            "tolerance": _clean(self.tolerance),
            "pass": bool(self.passed),
            "applicable": bool(self.applicable),
            "resolution": self.resolution,
            "seed": self.seed,
            "millis": int(self.millis),
            "note": self.note,
        }

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if not self.applicable:
            status = "N/A "
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in list(self.values.items())[:6])
        return f"{status} {self.check:<22} {self.manifold:<24} {shown}"


def _fmt(v):
    if isinstance(v, (bool, str)) or v is None:
        return str(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return f"{float(v):.6g}"


def not_applicable(check, manifold, reason, resolution=None, seed=0) -> CheckResult:
    return CheckResult(check, manifold, {}, 0.0, True, resolution, seed, applicable=False, note=reason)


@dataclass
class Report:
    results: list = field(default_factory=list)
    seed: int = 0
    profile: str = "default"

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {
            "suite_version": SUITE_VERSION,
            "profile": self.profile,
            "seed": self.seed,
            "environment": environment(),
            "verdict": "pass" if self.verdict else "fail",
            "results": [r.to_json() for r in self.results],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def text(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append(f"verdict: {'pass' if self.verdict else 'fail'} ({sum(r.passed for r in self.results)}/{len(self.results)})")
        return "\n".join(lines)


def environment() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__}


def schema() -> dict:
    text = resources.files("bochner_lab").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def validate(document: dict) -> None:
    """Raise jsonschema.ValidationError when ``document`` does not match the shipped schema."""
    import jsonschema

    jsonschema.validate(document, schema())
