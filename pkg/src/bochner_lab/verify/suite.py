"""The full verification suite over the built-in manifolds."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

from ..geometry import zoo as zoo_members
from ..geometry.zoo import flat_torus, round_sphere_2, round_sphere_2_twisted, s6_octonionic, s6_perturbed
from .checks import (
    CHECKS,
    Context,
    check_convergence,
    check_energy_bound,
    check_perturbation_sweep,
    run_check,
)
from .report import Report
from .tolerances import profile as tolerance_profile

SWEEP_EPS = (0.05, 0.1, 0.2, 0.4)
ENERGY_BASES = ((flat_torus, (1,), 16), (flat_torus, (2,), 4), (round_sphere_2, (), 16), (s6_octonionic, (), 3))


def _timed(ctx, fn, *args):
    start = time.perf_counter()
    result = fn(ctx, *args)
    if ctx.timing:
        result.millis = int(1000 * (time.perf_counter() - start))
    return result


def suite_level(ctx: Context) -> list:
    bases = [(make(*args), res) for make, args, res in ENERGY_BASES]
    jobs = [
        (check_perturbation_sweep, lambda eps: s6_perturbed(eps), SWEEP_EPS),
        (check_energy_bound, bases),
        (check_convergence, round_sphere_2(), (4, 8, 16, 32), "volume"),
        (check_convergence, s6_octonionic(), (3, 6, 12), "volume"),
        (check_convergence, round_sphere_2_twisted(), (8, 16, 32), "selfadjoint"),
    ]
    out = []
    for fn, *args in jobs:
        try:
            out.append(_timed(ctx, fn, *args))
        except Exception as exc:  # keep going; the failure is reported
            name = getattr(args[0], "name", "suite")
            out.append(ctx.result(fn.__name__.removeprefix("check_"), name, {}, 0.0, False, f"error: {type(exc).__name__}: {exc}", 0))
    return out


def run_suite(
    resolution: int | None = None,
    profile: str = "default",
    seed: int = 0,
    threads: int = 1,
    timing: bool = False,
    manifolds=None,
    checks=None,
    include_suite_level: bool = True,
) -> Report:
    """Run every check on every zoo member; deterministic for a fixed seed.

    Threads only prefetch the per-manifold node evaluations; the report is
    assembled in a fixed order, so its content does not depend on them.
    """
    ctx = Context(tolerance_profile(profile), seed, resolution, timing)
    members = zoo_members()
    names = list(members) if manifolds is None else list(manifolds)
    specs = [members[n] if isinstance(n, str) else n for n in names]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(ctx.values, specs))
    report = Report(seed=seed, profile=profile)
    for spec in specs:
        for name in checks or CHECKS:
            report.results.append(run_check(ctx, name, spec))
    if include_suite_level:
        report.results.extend(suite_level(ctx))
    return report
