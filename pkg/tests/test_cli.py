import json
import subprocess
import sys
from pathlib import Path

import pytest

from bochner_lab import cli
from bochner_lab.verify import CHECKS
from bochner_lab.verify.report import CheckResult, validate

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    doc = json.loads(out)
    validate(doc)
    return code, doc


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert "s6_octonionic dim=6 compatible=yes" in out.splitlines()
    assert "flat_torus_2_skew dim=2 compatible=no" in out.splitlines()
    code, doc = run_json(capsys, "list")
    assert code == 0 and doc["command"] == "list"
    assert {m["name"] for m in doc["manifolds"]} >= {"flat_torus_2", "round_sphere_2", "s6_octonionic"}


def test_diagnose_flat_torus(capsys):
    code, doc = run_json(capsys, "diagnose", "flat_torus_2")
    assert code == 0 and doc["verdict"] == "pass"
    summary = doc["results"][0]["values"]
    for key in ("int_grad2", "int_dJ2", "int_deltaJ2", "I4"):
        assert abs(summary[key]) <= 1e-10
    assert summary["harmonic"] is True and summary["integrable"] is True
    assert summary["e_range"] == pytest.approx([1.0, 1.0])


def test_diagnose_text_lists_traces(capsys):
    code, out, _ = run(capsys, "diagnose", "s2", "--resolution", "8")
    assert code == 0
    assert "T1_range" in out and "T2_range" in out and "S_range" in out


def test_diagnose_s6_reports_constants(capsys):
    code, doc = run_json(capsys, "diagnose", "s6_octonionic", "--resolution", "3")
    # a 3-point rule is far too coarse for the volume, but pointwise constants hold anyway
    status = {r["check"]: r["pass"] for r in doc["results"]}
    assert code == 1 and status["volume"] is False
    assert status["constants"] and status["bochner"] and status["classify"]
    v = doc["results"][0]["values"]
    assert v["T1_range"] == pytest.approx([30.0, 30.0], abs=1e-6)
    assert v["T2_range"] == pytest.approx([6.0, 6.0], abs=1e-6)
    assert v["integrable"] is False


def test_diagnose_spec_file(capsys):
    code, doc = run_json(capsys, "diagnose", str(DATA / "torus_rotation.spec"))
    assert code == 0 and doc["results"][0]["manifold"] == "torus_rotation"


@pytest.mark.parametrize(
    "argv",
    [
        ["diagnose", "missing.spec"],
        ["diagnose", "no_such_manifold"],
        ["verify", "no_such_check", "s2"],
        ["verify", "volume", "s2", "--seed", "-1"],
        ["verify", "volume", "s2", "--resolution", "1"],
        ["convergence", "volume", "s2", "8,4"],
        ["convergence", "volume", "s2", "8"],
        ["convergence", "energy", "s2", "4,8"],
        ["verify", "volume", "s2", "--tolerance-profile", "lax"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = cli.main(argv)
        raise SystemExit(code)
    assert info.value.code == 2


def test_parse_error_is_reported(capsys, tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("[manifold]\nname = x\ndim = 2\n[chart c]\ncoords = u, v\n")
    code, _, err = run(capsys, "diagnose", str(bad))
    assert code == 2 and "bad.spec" in err and "domain" in err


def test_bad_thread_env_var(capsys, monkeypatch):
    monkeypatch.setenv("BOCHNER_LAB_THREADS", "many")
    code, _, err = run(capsys, "verify", "volume", "s2")
    assert code == 2 and "BOCHNER_LAB_THREADS" in err


def test_thread_env_var_is_honoured(monkeypatch):
    monkeypatch.setenv("BOCHNER_LAB_THREADS", "3")
    assert cli.default_threads() == 3
    monkeypatch.delenv("BOCHNER_LAB_THREADS")
    assert cli.default_threads() >= 1


def test_verify_pass_and_fail_exit_codes(capsys, monkeypatch):
    code, doc = run_json(capsys, "verify", "volume", "s2")
    assert code == 0 and doc["results"][0]["pass"] is True

    def failing(ctx, spec):
        return CheckResult("volume", spec.name, {"volume": 0.0}, 1e-10, False)

    monkeypatch.setitem(CHECKS, "volume", failing)
    code, doc = run_json(capsys, "verify", "volume", "s2")
    assert code == 1 and doc["verdict"] == "fail"


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "weitzenbock", "round_sphere_2_twisted", "--seed", "42", "--json")
    second = run(capsys, "verify", "weitzenbock", "round_sphere_2_twisted", "--seed", "42", "--json")
    assert first == second and first[0] == 0


def test_convergence_volume_s6(capsys):
    code, doc = run_json(capsys, "convergence", "volume", "s6", "4,8,12")
    assert code == 0
    errors = [row["error"] for row in doc["table"]]
    assert errors[0] > errors[1] > errors[2] == 0.0
    assert [row["resolution"] for row in doc["table"]] == [4, 8, 12]


def test_convergence_integral_quantity(capsys):
    code, out, _ = run(capsys, "convergence", "selfadjoint", "round_sphere_2_twisted", "8,16,32")
    assert code == 0 and "monotone error decrease: yes" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bochner_lab", "list"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "round_sphere_2 dim=2 compatible=yes" in proc.stdout


def test_suite_json_validates(capsys):
    code, doc = run_json(capsys, "suite", "--seed", "42", "--threads", "1")
    assert code == 0, [r for r in doc["results"] if not r["pass"]]
    assert doc["seed"] == 42 and all(r["seed"] == 42 for r in doc["results"])
    assert all(r["millis"] == 0 for r in doc["results"])
