"""Command-line front end.

Exit codes: 0 when every check passes, 1 when any check fails, 2 for usage
or spec-file errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .geometry.quadrature import build_grid
from .geometry.zoo import zoo
from .specfile import SpecFileError, load
from .verify import CHECKS, Context, Report, evaluate, profile, run_check, run_suite
from .verify.report import SUITE_VERSION, CheckResult, environment, validate

ALIASES = {"s6": "s6_octonionic", "s2": "round_sphere_2", "t2": "flat_torus_2", "t4": "flat_torus_4"}
DIAGNOSE_CHECKS = ("volume", "constants", "bochner", "integral_criteria", "classify")
CONVERGENCE_QUANTITIES = ("volume", "I4", "I5", "grad2", "dJ2", "deltaJ2", "selfadjoint")
NOISE = 1e-12


class UsageError(Exception):
    pass


def default_threads() -> int:
    env = os.environ.get("BOCHNER_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"BOCHNER_LAB_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def resolve(ref: str):
    """A zoo name, a short alias, or a path to a spec file."""
    members = zoo()
    name = ALIASES.get(ref, ref)
    if name in members:
        return members[name]
    if ref.endswith(".spec") or Path(ref).exists():
        return load(ref)
    raise UsageError(f"unknown manifold {ref!r}; use a spec file path or one of: {', '.join(members)}")


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _resolution(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("must be at least 2")
    return v


def _resolutions(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None
    if len(vals) < 2 or min(vals) < 2 or sorted(set(vals)) != vals:
        raise argparse.ArgumentTypeError("need at least two increasing resolutions >= 2")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--resolution", type=_resolution, default=None, help="quadrature resolution override")
    common.add_argument("--seed", type=_nonneg, default=0)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: BOCHNER_LAB_THREADS or all cores)")
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--tolerance-profile", choices=("default", "strict"), default="default")
    common.add_argument("--timing", action="store_true", help="record wall time per check (makes output non-deterministic)")

    parser = argparse.ArgumentParser(prog="bochner-lab", description="Almost complex structure diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", parents=[common], help="list built-in manifolds")
    p = sub.add_parser("diagnose", parents=[common], help="norms, curvature traces and classification")
    p.add_argument("manifold")
    p = sub.add_parser("verify", parents=[common], help="run one check")
    p.add_argument("check")
    p.add_argument("manifold")
    sub.add_parser("suite", parents=[common], help="run the full suite")
    p = sub.add_parser("convergence", parents=[common], help="quadrature convergence table")
    p.add_argument("quantity", choices=CONVERGENCE_QUANTITIES)
    p.add_argument("manifold")
    p.add_argument("resolutions", type=_resolutions)
    return parser


def _compatible(spec) -> bool:
    return "compatible" in spec.known


def cmd_list(args):
    members = zoo()
    doc = {
        "verdict": "pass",
        "results": [],
        "manifolds": [
            {"name": s.name, "dim": s.dim, "compatible": _compatible(s), "known": list(s.known), "description": s.description}
            for s in members.values()
        ],
    }
    text = "\n".join(f"{s.name} dim={s.dim} compatible={'yes' if _compatible(s) else 'no'}" for s in members.values())
    return doc, text, True


def _range(v):
    v = np.asarray(v, dtype=float)
    v = v[np.isfinite(v)]
    return [float(v.min()), float(v.max())] if v.size else [None, None]


def cmd_diagnose(args, ctx):
    spec = resolve(args.manifold)
    nv = ctx.values(spec)
    summary = {
        "e_range": _range(nv["e"]),
        "int_grad2": nv.integral("grad2"),
        "int_dJ2": nv.integral("dJ2"),
        "int_deltaJ2": nv.integral("deltaJ2"),
        "T1_range": _range(nv["T1"]),
        "T2_range": _range(nv["T2"]),
        "S_range": _range(nv["S"]),
    }
    results = [run_check(ctx, name, spec) for name in DIAGNOSE_CHECKS]
    integral = next(r for r in results if r.check == "integral_criteria")
    classify = next(r for r in results if r.check == "classify")
    summary["I4"] = integral.values.get("I4")
    summary["I5"] = integral.values.get("I5")
    for flag in ("compatible", "kahler", "harmonic", "integrable"):
        summary[flag] = classify.values.get(flag)
    head = CheckResult("diagnose", spec.name, summary, 0.0, True, ctx.resolution(spec), ctx.seed)
    report = Report([head, *results], ctx.seed, args.tolerance_profile)
    lines = [f"{spec.name} (dim {spec.dim}, resolution {ctx.resolution(spec)}, {len(nv.w)} nodes)"]
    for k, v in summary.items():
        lines.append(f"  {k:<12} {_show(v)}")
    lines.extend(r.line() for r in results)
    return report.to_json(), "\n".join(lines), report.verdict


def _show(v):
    if isinstance(v, list):
        return "[" + ", ".join(_show(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def cmd_verify(args, ctx):
    if args.check not in CHECKS:
        raise UsageError(f"unknown check {args.check!r}; known: {', '.join(CHECKS)}")
    spec = resolve(args.manifold)
    report = Report([run_check(ctx, args.check, spec)], ctx.seed, args.tolerance_profile)
    return report.to_json(), report.text(), report.verdict


def cmd_suite(args, ctx):
    report = run_suite(
        resolution=args.resolution,
        profile=args.tolerance_profile,
        seed=args.seed,
        threads=args.threads,
        timing=args.timing,
    )
    return report.to_json(), report.text(), report.verdict


def convergence_table(spec, quantity, resolutions, seed=0):
    """Rows of (resolution, value, |value - value at the richest grid|)."""
    values = []
    for r in resolutions:
        if quantity == "volume":
            values.append(build_grid(spec, r).total_weight())
            continue
        nv = evaluate(spec, r, seed, extra=0)
        if quantity == "selfadjoint":
            values.append(nv.integral("lapJ_J") - nv.integral("dJ2") - nv.integral("deltaJ2"))
        elif quantity in ("I4", "I5"):
            ctx = Context(profile("default"), seed, r)
            ctx._cache[(spec.name, r)] = nv
            values.append(run_check(ctx, "integral_criteria", spec).values[quantity])
        else:
            values.append(nv.integral(quantity))
    best = values[-1]
    return [(r, v, abs(v - best)) for r, v in zip(resolutions, values)]


def cmd_convergence(args, ctx):
    spec = resolve(args.manifold)
    rows = convergence_table(spec, args.quantity, args.resolutions, ctx.seed)
    errors = [e for _, _, e in rows[:-1]]
    scale = max(abs(rows[-1][1]), 1.0)
    passed = all(b < a or a <= NOISE * scale for a, b in zip(errors, errors[1:]))
    values = {"resolutions": [r for r, _, _ in rows], "values": [v for _, v, _ in rows], "errors": [e for _, _, e in rows]}
    if args.quantity == "volume" and spec.exact_volume:
        values["exact"] = spec.exact_volume
        values["errors_vs_exact"] = [abs(v - spec.exact_volume) for _, v, _ in rows]
    result = CheckResult(f"convergence_{args.quantity}", spec.name, values, NOISE, passed, max(args.resolutions), ctx.seed)
    report = Report([result], ctx.seed, args.tolerance_profile)
    doc = report.to_json()
    doc["table"] = [{"resolution": r, "value": v, "error": e} for r, v, e in rows]
    lines = [f"{'resolution':>10} {'value':>22} {'error vs richest':>18}"]
    lines.extend(f"{r:>10d} {v:>22.15g} {e:>18.3e}" for r, v, e in rows)
    lines.append(f"monotone error decrease: {'yes' if passed else 'no'}")
    return doc, "\n".join(lines), passed


COMMANDS = {"diagnose": cmd_diagnose, "verify": cmd_verify, "suite": cmd_suite, "convergence": cmd_convergence}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        if args.threads is None:
            args.threads = default_threads()
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        start = time.perf_counter()
        if args.command == "list":
            doc, text, passed = cmd_list(args)
        else:
            ctx = Context(profile(args.tolerance_profile), args.seed, args.resolution, args.timing)
            doc, text, passed = COMMANDS[args.command](args, ctx)
    except (UsageError, SpecFileError) as exc:
        print(f"bochner-lab: error: {exc}", file=sys.stderr)
        return 2
    doc = {"suite_version": doc.get("suite_version", SUITE_VERSION), "command": args.command, **doc}
    doc.setdefault("seed", args.seed)
    doc.setdefault("profile", args.tolerance_profile)
    doc.setdefault("environment", environment())
    if args.json:
        validate(doc)
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text)
        if args.timing:
            print(f"({time.perf_counter() - start:.2f} s)")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
