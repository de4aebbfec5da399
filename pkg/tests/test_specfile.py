import math
from pathlib import Path

import numpy as np
import pytest

from bochner_lab.geometry.quadrature import build_grid
from bochner_lab.geometry.zoo import flat_torus, round_sphere_2
from bochner_lab.specfile import SpecFileError, load, loads
from bochner_lab.verify import evaluate

DATA = Path(__file__).parent / "data"

TORUS = (DATA / "torus_rotation.spec").read_text()


def test_torus_file_matches_builtin():
    spec = load(DATA / "torus_rotation.spec")
    assert spec.name == "torus_rotation" and spec.dim == 2 and spec.quadrature == "torus"
    ours = evaluate(spec, 8, extra=0)
    ref = evaluate(flat_torus(1), 8, extra=0)
    for key in ("e", "grad2", "T1", "T2", "S", "N2"):
        np.testing.assert_allclose(ours[key], ref[key], atol=1e-14)
    assert ours.volume == pytest.approx(4 * math.pi**2, rel=1e-14)


def test_sphere_file_matches_builtin():
    spec = load(DATA / "sphere2.spec")
    assert spec.exact_volume == pytest.approx(4 * math.pi)
    assert build_grid(spec, 16).total_weight() == pytest.approx(4 * math.pi, rel=1e-12)
    ours = evaluate(spec, 6, extra=0)
    ref = evaluate(round_sphere_2(), 6, extra=0)
    for key in ("e", "T1", "T2", "S", "bochner_residual"):
        np.testing.assert_allclose(ours[key], ref[key], atol=1e-12)


def test_comments_blank_lines_and_function_commas():
    text = TORUS.replace("row main = 0, -1", "row main = 0, -1   # first row\n\n")
    assert loads(text).name == "torus_rotation"


def _replace(old, new):
    assert old in TORUS
    return TORUS.replace(old, new, 1)


BROKEN = [
    (_replace("[manifold]", "[manifolds]"), "unknown section"),
    (_replace("dim = 2", "dim = 3"), "even"),
    (_replace("dim = 2", "dim = two"), "dim must be"),
    (_replace("embed = cos(u)", "embed = cos(w)"), "unknown variable"),
    (_replace("embed = cos(u)", "embed = cos(u"), "bad expression"),
    (_replace("row main = 1, 0", "row main = 1"), "entries"),
    (_replace("row main = 1, 0", ""), "rows"),
    (_replace("row main = 0, -1", "row other = 0, -1"), "chart"),
    (_replace("type = torus", "type = cube"), "quadrature type"),
    (_replace("resolution = 16", "resolution = 1"), "resolution"),
    (_replace("periodic = yes", "periodic = maybe"), "periodic"),
    (_replace("coords = u, v", "coords = u, u"), "repeated"),
    (_replace("domain = 0, 2*pi\ndomain = 0, 2*pi", "domain = 2*pi, 0\ndomain = 0, 2*pi"), "empty domain"),
    (_replace("name = torus_rotation", "name = torus_rotation\nname = again"), "duplicate"),
    (_replace("[quadrature]", "[quadrature]\nbogus = 1"), "unknown key"),
    (_replace("[chart main]", "[chart]"), "needs a name"),
    (_replace("[structure]", "[structure]\nbuiltin = embedded-cross-product"), "not both"),
    ("coords = u\n", "before any section"),
    ("[manifold]\njust words\n", "expected 'key = value'"),
    (TORUS.split("[quadrature]")[0], "missing [quadrature]"),
]


@pytest.mark.parametrize("text, fragment", BROKEN)
def test_malformed_files_are_rejected(text, fragment):
    with pytest.raises(SpecFileError) as info:
        loads(text, "bad.spec")
    assert fragment in str(info.value)
    assert str(info.value).startswith("bad.spec")


def test_error_reports_line_number():
    text = _replace("embed = sin(v)", "embed = sin(q)")
    with pytest.raises(SpecFileError) as info:
        loads(text)
    line = text.splitlines().index("embed = sin(q)") + 1
    assert info.value.line == line


def test_missing_file():
    with pytest.raises(SpecFileError, match="cannot read"):
        load(DATA / "does_not_exist.spec")


def test_unknown_builtin_structure():
    text = (DATA / "sphere2.spec").read_text().replace("embedded-cross-product", "quaternionic")
    with pytest.raises(SpecFileError, match="unknown builtin"):
        loads(text)
