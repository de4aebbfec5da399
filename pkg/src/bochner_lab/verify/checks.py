"""Named checks.  Each returns a CheckResult and never raises for a failed claim."""
from __future__ import annotations

import math
import time

import numpy as np

from .. import jcalc
from ..expr import Const, Var, cos, sin
from ..geometry import ChartGeometry, build_grid, sample_points
from ..geometry.charts import ManifoldSpec
from .pointwise import BOCHNER_ONLY, NodeValues, block_rng, evaluate, evaluate_points
from .report import CheckResult, not_applicable
from .tolerances import Tolerances

# scalars that must not depend on the chart or on the frame
INVARIANT_KEYS = ("e", "grad2", "dJ2", "deltaJ2", "lapJ_J", "lapJ2", "T1", "T2", "S", "hess_e", "N2")


class Context:
    """Shared state of one run: tolerances, seed and cached node evaluations."""

    def __init__(self, tol: Tolerances, seed: int = 0, resolution: int | None = None, timing: bool = False):
        self.tol = tol
        self.seed = seed
        self.resolution_override = resolution
        self.timing = timing
        self._cache = {}

    def resolution(self, spec: ManifoldSpec) -> int:
        return self.resolution_override or spec.resolution

    def values(self, spec: ManifoldSpec) -> NodeValues:
        key = (spec.name, self.resolution(spec))
        if key not in self._cache:
            self._cache[key] = evaluate(spec, self.resolution(spec), self.seed)
        return self._cache[key]

    def result(self, check, spec, values, tolerance, passed, note="", resolution=None):
        name = spec if isinstance(spec, str) else spec.name
        if resolution is None and not isinstance(spec, str):
            resolution = self.resolution(spec)
        return CheckResult(check, name, values, tolerance, bool(passed), resolution, self.seed, note=note)


def _max(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.max(v)) if v.size else 0.0


def _min(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.min(v)) if v.size else 0.0


# ------------------------------------------------------------- quadrature


def check_volume(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    res = ctx.resolution_override or spec.volume_resolution or spec.resolution
    total = build_grid(spec, res).total_weight()
    if spec.exact_volume is None:
        return ctx.result("volume", spec, {"volume": total}, ctx.tol.volume_rel, total > 0, "no closed form", res)
    rel = abs(total / spec.exact_volume - 1.0)
    values = {"volume": total, "exact": spec.exact_volume, "relative_error": rel}
    return ctx.result("volume", spec, values, ctx.tol.volume_rel, rel <= ctx.tol.volume_rel, resolution=res)


def check_selfadjoint(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    """(Delta J, J) = (dJ, dJ) + (delta J, delta J), up to quadrature error."""
    nv = ctx.values(spec)
    lap = nv.integral("lapJ_J")
    dd = nv.integral("dJ2")
    ll = nv.integral("deltaJ2")
    residual = abs(lap - dd - ll)
    scale = max(abs(lap), dd + ll)
    allowed = max(ctx.tol.integral_zero, ctx.tol.quadrature_rel * scale)
    values = {"lapJ_J": lap, "dJ_dJ": dd, "deltaJ_deltaJ": ll, "residual": residual, "relative": residual / scale if scale else 0.0}
    return ctx.result("selfadjoint", spec, values, allowed, residual <= allowed and lap >= -allowed)


# ---------------------------------------------------------------- Bochner


def check_bochner(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    """Pointwise Delta e + <Delta J, J> = |nabla J|^2 + T1 - T2 with Delta e the trace Hessian."""
    nv = ctx.values(spec)
    values = {
        "max_residual": nv.maxabs("bochner_residual"),
        "T1_min": _min(nv["T1"]),
        "T1_max": _max(nv["T1"]),
        "T2_min": _min(nv["T2"]),
        "T2_max": _max(nv["T2"]),
        "grad2_min": _min(nv["grad2"]),
        "grad2_max": _max(nv["grad2"]),
        "nodes": int(len(nv.w)),
    }
    return ctx.result("bochner", spec, values, ctx.tol.identity, values["max_residual"] <= ctx.tol.identity)


def check_constants(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    """Closed-form pointwise values (S, T1, T2, e, |nabla J|^2) at every node."""
    if not spec.constants:
        return not_applicable("constants", spec.name, "no closed-form constants", ctx.resolution(spec), ctx.seed)
    nv = ctx.values(spec)
    values = {}
    worst = 0.0
    for key, c in spec.constants.items():
        dev = _max(np.abs(nv[key] - c))
        values[f"{key}_expected"] = c
        values[f"{key}_max_deviation"] = dev
        worst = max(worst, dev)
    return ctx.result("constants", spec, values, ctx.tol.constants, worst <= ctx.tol.constants)


def check_zero_fixture(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    """Flat metric with constant compatible J: every operator and curvature term vanishes."""
    if not ("flat" in spec.known and "kahler" in spec.known):
        return not_applicable("zero_fixture", spec.name, "not a flat Kahler fixture", ctx.resolution(spec), ctx.seed)
    nv = ctx.values(spec)
    values = {
        "N": math.sqrt(_max(nv["N2"])),
        "dJ": math.sqrt(_max(nv["dJ2"])),
        "deltaJ": math.sqrt(_max(nv["deltaJ2"])),
        "lapJ": math.sqrt(_max(nv["lapJ2"])),
        "nablaJ": math.sqrt(_max(nv["grad2"])),
        "T1": nv.maxabs("T1"),
        "T2": nv.maxabs("T2"),
        "S": nv.maxabs("S"),
    }
    return ctx.result("zero_fixture", spec, values, ctx.tol.zero, max(values.values()) <= ctx.tol.zero)


def check_integral_criteria(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    """I4 = int(|nabla J|^2 + T1 - T2) and, for compatible J, I5 = int(|nabla J|^2 + S - T2)."""
    nv = ctx.values(spec)
    tol = ctx.tol
    I4 = nv.integral("grad2") + nv.integral("T1") - nv.integral("T2")
    vol = nv.volume
    zero = tol.integral_zero * max(1.0, vol)
    values = {"I4": I4, "I4_per_volume": I4 / vol, "grid_volume": vol}
    passed = True
    # integrated Bochner: I4 = (dJ, dJ) + (delta J, delta J) up to quadrature
    energy = nv.integral("dJ2") + nv.integral("deltaJ2")
    values["dJ_dJ_plus_deltaJ_deltaJ"] = energy
    passed &= abs(I4 - energy) <= max(zero, tol.quadrature_rel * max(abs(I4), energy))
    if nv.compatible:
        I5 = nv.integral("grad2") + nv.integral("S") - nv.integral("T2")
        trace_gap = _max(np.abs(nv["T1"] - nv["S"]))
        values.update(I5=I5, max_T1_minus_S=trace_gap)
        passed &= trace_gap <= tol.constants
        passed &= abs(I4 - I5) <= max(zero, tol.quadrature_rel * abs(I4))
    else:
        values["I5"] = None
    certificate = I4 <= zero
    values["classification"] = "harmonic certificate" if certificate else "obstruction"
    maxN = math.sqrt(_max(nv["N2"]))
    values["max_N"] = maxN
    if certificate:
        passed &= maxN <= tol.integrable
    if {"grad2", "T1", "T2"} <= set(spec.constants):
        c = spec.constants
        expected = (c["grad2"] + c["T1"] - c["T2"]) * vol
        values["I4_expected"] = expected
        passed &= abs(I4 - expected) <= max(zero, tol.quadrature_rel * abs(expected))
    return ctx.result("integral_criteria", spec, values, zero, passed)


# ---------------------------------------------------------- identities


def check_hermitian_identities(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    nv = ctx.values(spec)
    if not nv.compatible:
        return not_applicable("hermitian_identities", spec.name, "J is not compatible with g", nv.resolution, ctx.seed)
    values = {k: nv.maxabs(k) for k in ("codiff_J", "codiff_energy", "nijenhuis_trace", "codiff_kahler_form")}
    passed = max(values.values()) <= ctx.tol.hermitian
    values["random_vectors_per_node"] = 20
    return ctx.result("hermitian_identities", spec, values, ctx.tol.hermitian, passed)


def check_harmonic_integrable(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    """dJ(X, Y) - dJ(JX, JY) = -J N(X, Y) for random X, Y at every node."""
    nv = ctx.values(spec)
    r = nv.maxabs("harmonic_integrable_residual")
    return ctx.result("harmonic_integrable_identity", spec, {"max_residual": r}, ctx.tol.harmonic_integrable, r <= ctx.tol.harmonic_integrable)


def check_inequalities(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    nv = ctx.values(spec)
    tol = ctx.tol
    n = spec.dim
    m = n // 2
    values = {}
    passed = True
    notes = []

    # |dJ|^2 <= 2(|nabla J|^2 - |delta J|^2 / n) at every node
    slack = 2 * (nv["grad2"] - nv["deltaJ2"] / n) - nv["dJ2"]
    scale = np.maximum(1.0, np.abs(nv["grad2"]))
    values["dJ_bound_min_slack"] = _min(slack)
    passed &= bool(np.all(slack >= -tol.identity * scale))

    # balanced branch: compatible with delta J = 0
    balanced = nv.compatible and _max(nv["deltaJ2"]) <= tol.balanced
    values["balanced"] = balanced
    if balanced:
        gap = np.abs(nv["S"] - nv["T2"]) - nv["grad2"]
        values["balanced_max_excess"] = _max(gap)
        passed &= _max(gap) <= tol.identity * _max(scale)
    else:
        values["balanced_max_excess"] = None
        notes.append("curvature bound for balanced structures not applicable")

    # integral bounds valid for any J
    g = nv.integral("grad2")
    mid = nv.integral("T1") - nv.integral("T2")
    slop = max(tol.integral_zero * max(1.0, nv.volume), tol.quadrature_rel * g)
    values.update(integral_lower=-g, integral_middle=mid, integral_upper=(n - 1) * g)
    passed &= -g - slop <= mid <= (n - 1) * g + slop

    # Kahler criterion: compatible, constant e, harmonic
    harmonic = nv.integral("dJ2") + nv.integral("deltaJ2") <= tol.harmonic
    constant_e = _max(nv["e"]) - _min(nv["e"]) <= tol.constants
    if nv.compatible and harmonic and constant_e:
        excess = _max(nv["S"] - nv["T2"])
        values["max_S_minus_T2"] = excess
        passed &= excess <= tol.constants
        if math.sqrt(_max(nv["grad2"])) <= tol.kahler:
            values["kahler_equality_gap"] = _max(np.abs(nv["S"] - nv["T2"]))
            passed &= values["kahler_equality_gap"] <= tol.constants
    else:
        values["max_S_minus_T2"] = None
        notes.append("Kahler criterion needs a compatible harmonic J")

    # energy bound e(J) >= m
    values["energy_min_minus_m"] = _min(nv["e"]) - m
    passed &= values["energy_min_minus_m"] >= -tol.energy
    return ctx.result("inequalities", spec, values, tol.identity, passed, "; ".join(notes))


def check_classify(ctx: Context, spec: ManifoldSpec) -> CheckResult:
    nv = ctx.values(spec)
    tol = ctx.tol
    max_grad = math.sqrt(_max(nv["grad2"]))
    harmonic_energy = nv.integral("dJ2") + nv.integral("deltaJ2")
    maxN = math.sqrt(_max(nv["N2"]))
    kahler = nv.compatible and max_grad <= tol.kahler
    harmonic = harmonic_energy <= tol.harmonic
    integrable = maxN <= tol.integrable
    chain = (not kahler or harmonic) and (not harmonic or integrable)
    values = {
        "kahler": kahler,
        "harmonic": harmonic,
        "integrable": integrable,
        "compatible": nv.compatible,
        "max_nablaJ": max_grad,
        "harmonic_energy": harmonic_energy,
        "max_N": maxN,
    }
    i = int(np.argmax(nv["N12"]))
    values["witness_N_e1_e2"] = float(nv["N12"][i])
    values["witness_chart"] = spec.charts[int(nv.chart[i])].name
    values["witness_point"] = [float(v) for v in nv.x[i]]
    passed = chain
    flags = {"kahler": kahler, "harmonic": harmonic, "integrable": integrable}
    for tag, flag in flags.items():
        if tag in spec.known:
            passed &= flag
        if f"non-{tag}" in spec.known:
            passed &= not flag
    if "non-integrable" in spec.known:
        passed &= values["witness_N_e1_e2"] >= tol.witness
    return ctx.result("classify", spec, values, tol.integrable, passed)


# ------------------------------------------------- random forms, d^2


def random_component(coords, rng) -> object:
    """c0 + c1 x_a + c2 x_a x_b + c3 sin(x_c) + c4 cos(x_d) with random coefficients."""
    xs = [Var(c) for c in coords]
    a, b, c, d = rng.integers(0, len(xs), 4)
    k = rng.uniform(-1.0, 1.0, 5)
    return (
        Const(float(k[0]))
        + Const(float(k[1])) * xs[a]
        + Const(float(k[2])) * xs[a] * xs[b]
        + Const(float(k[3])) * sin(xs[c])
        + Const(float(k[4])) * cos(xs[d])
    )


def random_endomorphism(coords, rng) -> np.ndarray:
    n = len(coords)
    arr = np.empty((n, n), dtype=object)
    for idx in np.ndindex(n, n):
        arr[idx] = random_component(coords, rng)
    return arr


def _sample(spec, count, rng):
    return [b for b in sample_points(spec, count, rng) if len(b)]


def check_weitzenbock(ctx: Context, spec: ManifoldSpec, forms: int = 20, points: int = 10) -> CheckResult:
    """Delta w = -nabla^2 w + S for random degree-1 forms."""
    rng = block_rng(ctx.seed, spec.name, 0, stream=2)
    worst = 0.0
    for _ in range(forms):
        blk = _sample(spec, points, rng)[0]
        geom = ChartGeometry(spec, spec.charts[blk.chart], blk.x)
        w = jcalc.TBForm(geom.field(random_endomorphism(geom.chart.coords, rng)), 1)
        lap = jcalc.hodge_laplace(geom, w).field.value
        rhs = -jcalc.rough_laplacian(geom, w).field.value + jcalc.weitzenbock_term(geom, w).field.value
        scale = max(1.0, float(np.max(np.abs(lap))))
        worst = max(worst, float(np.max(np.abs(lap - rhs))) / scale)
    values = {"max_residual": worst, "forms": forms, "points_per_form": points}
    return ctx.result("weitzenbock", spec, values, ctx.tol.identity, worst <= ctx.tol.identity)


def d_squared_residual(geom, A):
    """d^2 A(X1, X2, X3) - [R(X3,X2)AX1 + R(X1,X3)AX2 + R(X2,X1)AX3] in components."""
    w = jcalc.TBForm(A, 1)
    dd = jcalc.exterior_d(geom, jcalc.exterior_d(geom, w)).field.value
    Rm = geom.values(geom.riemann)
    Av = A.value
    rhs = (
        np.einsum("plkcb,pka->plabc", Rm, Av)
        + np.einsum("plkac,pkb->plabc", Rm, Av)
        + np.einsum("plkba,pkc->plabc", Rm, Av)
    )
    return dd, rhs


def check_d_squared(ctx: Context, spec: ManifoldSpec, forms: int = 5, points: int = 10) -> CheckResult:
    rng = block_rng(ctx.seed, spec.name, 0, stream=3)
    worst = 0.0
    size = 0.0
    for _ in range(forms):
        blk = _sample(spec, points, rng)[0]
        geom = ChartGeometry(spec, spec.charts[blk.chart], blk.x)
        A = geom.field(random_endomorphism(geom.chart.coords, rng))
        dd, rhs = d_squared_residual(geom, A)
        scale = max(1.0, float(np.max(np.abs(rhs))))
        worst = max(worst, float(np.max(np.abs(dd - rhs))) / scale)
        size = max(size, float(np.max(np.abs(dd))))
    values = {"max_residual": worst, "max_d2A": size, "forms": forms}
    return ctx.result("d_squared", spec, values, ctx.tol.d_squared, worst <= ctx.tol.d_squared)


# ------------------------------------------------------------ invariance


def _compare(a: dict, b: dict):
    worst, where = 0.0, ""
    for k in INVARIANT_KEYS:
        if k in a and k in b:
            diff = np.abs(a[k] - b[k]) / np.maximum(1.0, np.abs(a[k]))
            m = _max(diff)
            if m > worst:
                worst, where = m, k
    return worst, where


def overlap_points(spec, count, rng):
    """Points of the sphere lying in the usable region of both charts, in both charts' coordinates."""
    d = spec.dim
    north = next(i for i, c in enumerate(spec.charts) if c.projection == "stereographic-north")
    south = next(i for i, c in enumerate(spec.charts) if c.projection == "stereographic-south")
    found = []
    while sum(len(f) for f in found) < count:
        p = rng.normal(size=(4 * count, d + 1))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        p = p[np.abs(p[:, -1]) < 0.3]
        xn = spec.charts[north].project(p)
        xs = spec.charts[south].project(p)
        ok = spec.charts[north].usable(xn) & spec.charts[south].usable(xs)
        found.append(p[ok])
    p = np.concatenate(found)[:count]
    return north, spec.charts[north].project(p), south, spec.charts[south].project(p)


def check_chart_overlap(ctx: Context, spec: ManifoldSpec, count: int = 20) -> CheckResult:
    if len(spec.charts) < 2:
        return not_applicable("chart_overlap", spec.name, "single chart", None, ctx.seed)
    rng = block_rng(ctx.seed, spec.name, 0, stream=4)
    ci, xi, cj, xj = overlap_points(spec, count, rng)
    a = evaluate_points(spec, ci, xi, block_rng(ctx.seed, spec.name, 1, stream=4))
    b = evaluate_points(spec, cj, xj, block_rng(ctx.seed, spec.name, 1, stream=4))
    worst, where = _compare(a, b)
    values = {"max_relative_difference": worst, "worst_quantity": where, "points": count}
    return ctx.result("chart_overlap", spec, values, ctx.tol.invariance, worst <= ctx.tol.invariance, resolution=None)


def check_frame_rotation(ctx: Context, spec: ManifoldSpec, count: int = 20) -> CheckResult:
    rng = block_rng(ctx.seed, spec.name, 0, stream=5)
    worst, where = 0.0, ""
    for blk in _sample(spec, count, rng):
        a = evaluate_points(spec, blk.chart, blk.x, block_rng(ctx.seed, spec.name, 1, stream=5))
        b = evaluate_points(spec, blk.chart, blk.x, block_rng(ctx.seed, spec.name, 2, stream=5), rotate=True)
        w, k = _compare(a, b)
        if w >= worst:
            worst, where = w, k
    values = {"max_relative_difference": worst, "worst_quantity": where, "points": count}
    return ctx.result("frame_rotation", spec, values, ctx.tol.invariance, worst <= ctx.tol.invariance, resolution=None)


# -------------------------------------------------------- suite-level


def check_perturbation_sweep(ctx: Context, factory, eps_values=(0.05, 0.1, 0.2, 0.4), name="s6_perturbed", required=0.05) -> CheckResult:
    """Smallest Bochner integrand |nabla J|^2 + T1 - T2 under conformal perturbations.

    Passes when the integrand is positive at every node for every eps up to
    ``required``; ``positive_up_to`` is the largest eps below which no grid
    point saw a non-positive value.
    """
    values = {}
    lows = []
    for eps in sorted(eps_values):
        spec = factory(eps)
        nv = evaluate(spec, ctx.resolution(spec), ctx.seed, quantities=BOCHNER_ONLY)
        low = _min(nv["grad2"] + nv["T1"] - nv["T2"])
        values[f"min_integrand_eps_{eps:g}"] = low
        lows.append((eps, low))
    values["min_integrand"] = [low for _, low in lows]
    reach = None
    for eps, low in lows:
        if low <= 0:
            break
        reach = eps
    values["positive_up_to"] = reach
    passed = all(low > 0 for eps, low in lows if eps <= required) and any(eps <= required for eps, _ in lows)
    res = ctx.resolution_override or factory(eps_values[0]).resolution
    return ctx.result("perturbation_sweep", name, values, 0.0, passed, "grid search only; no bound is claimed", res)


def check_energy_bound(ctx: Context, bases, structures: int = 50) -> CheckResult:
    """e(J) >= dim/2 for structures J = A J0 A^{-1} with random A = id + eps B."""
    from ..geometry.structures import AmbientEndomorphism, ConjugatedStructure

    rng = block_rng(ctx.seed, "conjugated", 0, stream=6)
    worst = math.inf
    nodes = 0
    for k in range(structures):
        base, res = bases[k % len(bases)]
        N = base.charts[0].ambient_dim
        B = np.empty((N, N), dtype=object)
        for idx in np.ndindex(N, N):
            i, j = rng.integers(0, N, 2)
            c = [float(v) for v in rng.uniform(-1, 1, 3) / N]
            B[idx] = f"{c[0]!r} + {c[1]!r}*X{i + 1} + {c[2]!r}*X{i + 1}*X{j + 1}"
        eps = float(rng.uniform(0.05, 0.3))
        spec = _with_structure(base, ConjugatedStructure(base.structure, AmbientEndomorphism(B, label="random"), eps))
        for blk in build_grid(spec, res).blocks(4096):
            geom = ChartGeometry(spec, spec.charts[blk.chart], blk.x, embedding_order=1)
            J = spec.structure.build(geom).value
            g = geom.values(geom.metric)
            ginv = np.linalg.inv(g)
            e = 0.5 * np.einsum("pab,pij,pai,pbj->p", g, ginv, J, J)
            worst = min(worst, float(np.min(e)) - spec.dim / 2)
            nodes += len(e)
    values = {"min_e_minus_half_dim": worst, "structures": structures, "nodes": nodes}
    return ctx.result("energy_bound", "conjugated", values, ctx.tol.energy, worst >= -ctx.tol.energy, resolution=None)


def _with_structure(spec, structure):
    from dataclasses import replace

    return replace(spec, name=f"{spec.name}_conjugated", structure=structure, constants={}, known=())


def check_convergence(ctx: Context, spec: ManifoldSpec, resolutions, quantity: str = "selfadjoint") -> CheckResult:
    """Quadrature-limited error shrinking with resolution."""
    errors = []
    vals = []
    for r in resolutions:
        if quantity == "volume":
            v = build_grid(spec, r).total_weight()
            err = abs(v / spec.exact_volume - 1.0)
        else:
            nv = evaluate(spec, r, ctx.seed, extra=0)
            v = nv.integral("lapJ_J")
            err = abs(v - nv.integral("dJ2") - nv.integral("deltaJ2")) / max(abs(v), 1e-300)
        vals.append(v)
        errors.append(err)
    noise = 1e-12
    passed = True
    for a, b in zip(errors, errors[1:]):
        if a > noise:
            passed &= b < a
    values = {"resolutions": list(resolutions), "values": vals, "errors": errors, "quantity": quantity}
    return ctx.result(f"convergence_{quantity}", spec, values, noise, passed, resolution=max(resolutions))


CHECKS = {
    "volume": check_volume,
    "zero_fixture": check_zero_fixture,
    "constants": check_constants,
    "selfadjoint": check_selfadjoint,
    "bochner": check_bochner,
    "integral_criteria": check_integral_criteria,
    "hermitian_identities": check_hermitian_identities,
    "harmonic_integrable_identity": check_harmonic_integrable,
    "inequalities": check_inequalities,
    "classify": check_classify,
    "weitzenbock": check_weitzenbock,
    "d_squared": check_d_squared,
    "chart_overlap": check_chart_overlap,
    "frame_rotation": check_frame_rotation,
}


def run_check(ctx: Context, name: str, spec: ManifoldSpec) -> CheckResult:
    """Run one named check, converting unexpected errors into a failed result."""
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    start = time.perf_counter()
    try:
        result = CHECKS[name](ctx, spec)
    except Exception as exc:  # a broken check must not abort a suite
        result = ctx.result(name, spec, {}, 0.0, False, f"error: {type(exc).__name__}: {exc}")
    if ctx.timing:
        result.millis = int(1000 * (time.perf_counter() - start))
    return result
