"""Acceptance criteria 1-9, each checked at its stated tolerance.

The full suite runs once (plus a second time for the byte-determinism
criterion); every test reads the values it needs from that report and
compares them against the thresholds below, independently of the suite's own
pass flags.  Run ``python3 -m pytest tests/test_acceptance.py -v`` and read
the "acceptance criteria" section at the end of the output.
"""
import math

import pytest

from bochner_lab.geometry.zoo import zoo
from bochner_lab.verify import run_suite

SEED = 0


@pytest.fixture(scope="module")
def suite():
    report = run_suite(seed=SEED)
    by_key = {(r.check, r.manifold): r for r in report.results}
    return report, by_key


def values(by_key, check, manifold):
    return by_key[(check, manifold)].values


def test_criterion_1_zero_fixture(suite, record_criterion):
    _, by_key = suite
    worst = {}
    for name in ("flat_torus_2", "flat_torus_4"):
        v = values(by_key, "zero_fixture", name)
        assert set(v) == {"N", "dJ", "deltaJ", "lapJ", "nablaJ", "T1", "T2", "S"}
        worst[name] = max(v.values())
    ok = all(w <= 1e-10 for w in worst.values())
    record_criterion(1, ok, "flat torus, constant compatible J: max over |N|,|dJ|,|dJ*|,|LJ|,|nabla J|,T1,T2,S = "
                     + ", ".join(f"{k} {w:.2e}" for k, w in worst.items()) + " (tol 1e-10)")
    assert ok


def test_criterion_2_kahler_sphere(suite, record_criterion):
    _, by_key = suite
    m = "round_sphere_2"
    classify = values(by_key, "classify", m)
    const = values(by_key, "constants", m)
    integ = values(by_key, "integral_criteria", m)
    ineq = values(by_key, "inequalities", m)
    dev = max(const[f"{k}_max_deviation"] for k in ("S", "T1", "T2"))
    checks = {
        "max|nabla J|": (classify["max_nablaJ"], 1e-8),
        "max|S,T1,T2 - 2|": (dev, 1e-7),
        "|I4|": (abs(integ["I4"]), 1e-7),
        "|I5|": (abs(integ["I5"]), 1e-7),
        "equality gap |S - T2|": (ineq["kahler_equality_gap"], 1e-7),
    }
    ok = all(v <= tol for v, tol in checks.values()) and classify["kahler"]
    ok &= all(const[f"{k}_expected"] == 2.0 for k in ("S", "T1", "T2"))
    record_criterion(2, ok, "round S^2: " + ", ".join(f"{k}={v:.1e}<={t:g}" for k, (v, t) in checks.items()))
    assert ok


def test_criterion_3_s6_constants_and_sweep(suite, record_criterion):
    _, by_key = suite
    m = "s6_octonionic"
    b = values(by_key, "bochner", m)
    integ = values(by_key, "integral_criteria", m)
    sweep = values(by_key, "perturbation_sweep", "s6_perturbed")
    t1 = max(abs(b["T1_min"] - 30), abs(b["T1_max"] - 30))
    t2 = max(abs(b["T2_min"] - 6), abs(b["T2_max"] - 6))
    e_dev = values(by_key, "constants", m)["e_max_deviation"]
    curvature_part = b["T1_min"] - b["T2_max"]
    ok = t1 <= 1e-6 and t2 <= 1e-6 and e_dev <= 1e-6
    ok &= curvature_part >= 24 - 1e-6 and integ["I4"] > 0
    ok &= sweep["min_integrand_eps_0.05"] > 0
    record_criterion(
        3,
        ok,
        f"S^6: max|T1-30|={t1:.1e}, max|T2-6|={t2:.1e}, T1-T2>={curvature_part:.6f}, I4={integ['I4']:.4f}>0, "
        f"sweep min integrand at eps=0.05 {sweep['min_integrand_eps_0.05']:.3f}, positive up to eps={sweep['positive_up_to']}",
    )
    assert ok


def test_criterion_4_nonintegrability_witness(suite, record_criterion):
    report, by_key = suite
    c = values(by_key, "classify", "s6_octonionic")
    witness = c["witness_N_e1_e2"]
    implication = [
        r.manifold for r in report.results if r.check == "classify" and r.values["harmonic"] and not r.values["integrable"]
    ]
    prop = [r for r in report.results if r.check == "harmonic_integrable_identity"]
    ok = witness >= 0.1 and not c["integrable"] and not implication and all(r.passed for r in prop)
    record_criterion(
        4,
        ok,
        f"S^6 witness |N(e1,e2)|={witness:.4f} at {c['witness_chart']} {[round(x, 4) for x in c['witness_point']]}; "
        f"harmonic-but-not-integrable members: {implication or 'none'}; identity residual max "
        f"{max(r.values['max_residual'] for r in prop):.1e} over {len(prop)} members",
    )
    assert ok


def test_criterion_5_weitzenbock_and_d_squared(suite, record_criterion):
    report, _ = suite
    w = [r for r in report.results if r.check == "weitzenbock"]
    d2 = [r for r in report.results if r.check == "d_squared"]
    assert len(w) == len(zoo()) and len(d2) == len(zoo())
    worst_w = max(r.values["max_residual"] for r in w)
    worst_d = max(r.values["max_residual"] for r in d2)
    ok = worst_w <= 1e-6 and worst_d <= 1e-7 and all(r.values["forms"] == 20 for r in w)
    record_criterion(5, ok, f"20 random degree-1 forms per member: max Weitzenbock residual {worst_w:.1e} (tol 1e-6), "
                     f"max d^2 curvature residual {worst_d:.1e} (tol 1e-7)")
    assert ok


def test_criterion_6_bochner_identity(suite, record_criterion):
    report, by_key = suite
    b = [r for r in report.results if r.check == "bochner"]
    compat = {r.manifold: values(by_key, "classify", r.manifold)["compatible"] for r in b}
    worst = max(r.values["max_residual"] for r in b)
    ok = worst <= 1e-6 and len(b) == len(zoo()) and any(compat.values()) and not all(compat.values())
    record_criterion(6, ok, f"pointwise Bochner residual max {worst:.1e} (tol 1e-6) on {len(b)} members "
                     f"({sum(compat.values())} compatible, {len(b) - sum(compat.values())} non-compatible)")
    assert ok


def test_criterion_7_hermitian_identities(suite, record_criterion):
    _, by_key = suite
    worst = {}
    for m in ("round_sphere_2", "s6_octonionic", "flat_torus_2"):
        v = values(by_key, "hermitian_identities", m)
        assert v["random_vectors_per_node"] == 20
        worst[m] = max(v[k] for k in ("codiff_J", "codiff_energy", "nijenhuis_trace", "codiff_kahler_form"))
    ok = all(w <= 1e-7 for w in worst.values())
    record_criterion(7, ok, "max residual over (i), (ii), trace, delta omega/delta J: "
                     + ", ".join(f"{k} {w:.1e}" for k, w in worst.items()) + " (tol 1e-7)")
    assert ok


def test_criterion_8_inequalities(suite, record_criterion):
    report, by_key = suite
    ineq = [r for r in report.results if r.check == "inequalities"]
    balanced = [r.manifold for r in ineq if r.values["balanced"]]
    balanced_excess = max(r.values["balanced_max_excess"] for r in ineq if r.values["balanced"])
    slack = min(r.values["dJ_bound_min_slack"] for r in ineq)
    integral_ok = all(
        r.values["integral_lower"] <= r.values["integral_middle"] + 1e-7 * max(1.0, abs(r.values["integral_lower"]))
        and r.values["integral_middle"] <= r.values["integral_upper"] + 1e-7 * max(1.0, r.values["integral_upper"])
        for r in ineq
    )
    energy = values(by_key, "energy_bound", "conjugated")
    ok = all(r.passed for r in ineq) and slack >= -1e-6 and balanced_excess <= 1e-6 and integral_ok
    ok &= energy["structures"] == 50 and energy["min_e_minus_half_dim"] >= -1e-12
    ok &= min(r.values["energy_min_minus_m"] for r in ineq) >= -1e-12
    record_criterion(
        8,
        ok,
        f"min slack of |dJ|^2 bound {slack:.1e}; balanced members {balanced} max excess {balanced_excess:.1e}; "
        f"integral bounds hold on {len(ineq)} members; 50 conjugated J: min e - dim/2 = {energy['min_e_minus_half_dim']:.2e}",
    )
    assert ok


def test_criterion_9_numerical_hygiene(suite, record_criterion):
    report, by_key = suite
    s2 = values(by_key, "volume", "round_sphere_2")["relative_error"]
    s6 = values(by_key, "volume", "s6_octonionic")["relative_error"]
    conv = values(by_key, "convergence_selfadjoint", "round_sphere_2_twisted")
    errs = conv["errors"]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    overlap = max(r.values["max_relative_difference"] for r in report.results if r.check == "chart_overlap" and r.applicable)
    rotation = max(r.values["max_relative_difference"] for r in report.results if r.check == "frame_rotation")
    again = run_suite(seed=SEED)
    deterministic = again.dumps() == report.dumps()
    ok = s2 <= 1e-10 and s6 <= 1e-6 and decreasing and errs[0] > 0 and overlap <= 1e-7 and rotation <= 1e-7
    ok &= deterministic and not math.isnan(s6)
    record_criterion(
        9,
        ok,
        f"volume rel err S^2 {s2:.1e} (tol 1e-10), S^6 {s6:.1e} (tol 1e-6); self-adjointness residual "
        f"{', '.join(f'{e:.1e}' for e in errs)} at resolutions {conv['resolutions']}; chart overlap {overlap:.1e}, "
        f"frame rotation {rotation:.1e} (tol 1e-7); byte-identical rerun: {deterministic}",
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
