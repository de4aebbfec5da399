"""Plain-text manifold spec files.

Grammar (one entry per line; ``#`` starts a comment; blank lines ignored)::

    file      = { section } ;
    section   = header , { entry } ;
    header    = "[" , ( "manifold" | "chart" , name | "structure" | "metric" | "quadrature" ) , "]" ;
    entry     = key , [ name ] , "=" , value ;

Sections and keys:

    [manifold]    name = <identifier>        dim = <even integer>
                  description = <text>       (optional)
    [chart NAME]  coords = x1, x2, ...       (comma separated identifiers)
                  domain = <expr>, <expr>    (one line per coordinate, in order)
                  embed = <expr>             (one line per ambient coordinate)
                  margin = <number>          (optional, default 0)
                  periodic = yes | no        (optional, default no)
                  projection = stereographic-north | stereographic-south   (spheres)
                  conformal_scale = <expr>   (optional: g_chart = scale * identity)
    [structure]   builtin = embedded-cross-product
                  or, per chart, one line per matrix row:
                  row NAME = <expr>, <expr>, ...
    [metric]      conformal = <expr in X1..XN>   (optional)
    [quadrature]  type = torus | sphere      resolution = <integer >= 2>

Keys listed as "one line per ..." repeat; all other keys may appear once.
Expressions use the grammar of :mod:`bochner_lab.expr.parser`.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .expr import ParseError, evaluate, free_symbols, parse
from .geometry.charts import Chart, ManifoldSpec
from .geometry.structures import ChartComponents, structure_from_tag

_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)(?:\s+([A-Za-z_][A-Za-z0-9_]*))?\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_]+)(?:\s+([A-Za-z_][A-Za-z0-9_]*))?\s*=\s*(.*)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
REPEATED = {"domain", "embed", "row"}
SECTIONS = {"manifold", "chart", "structure", "metric", "quadrature"}


class SpecFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<spec>"):
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)
        self.line = line


def _split_list(text: str) -> list:
    """Split on top-level commas (commas inside parentheses belong to calls)."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    out.append("".join(cur).strip())
    return out


def _read_sections(text: str, source: str):
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            kind, name = m.group(1), m.group(2)
            if kind not in SECTIONS:
                raise SpecFileError(f"unknown section [{kind}]", lineno, source)
            if (kind == "chart") != (name is not None):
                raise SpecFileError(f"section [{line[1:-1]}] {'needs' if kind == 'chart' else 'takes no'} a name", lineno, source)
            current = {"kind": kind, "name": name, "line": lineno, "entries": {}}
            sections.append(current)
            continue
        m = _ENTRY.match(line)
        if not m:
            raise SpecFileError(f"expected 'key = value', got {line!r}", lineno, source)
        if current is None:
            raise SpecFileError("entry before any section header", lineno, source)
        key, qual, value = m.group(1), m.group(2), m.group(3).strip()
        slot = (key, qual)
        entries = current["entries"]
        if key in REPEATED:
            entries.setdefault(slot, []).append((value, lineno))
        elif slot in entries:
            raise SpecFileError(f"duplicate key {key!r}", lineno, source)
        else:
            entries[slot] = (value, lineno)
    return sections


class _Builder:
    def __init__(self, sections, source):
        self.sections = sections
        self.source = source

    def fail(self, msg, line=None):
        raise SpecFileError(msg, line, self.source)

    def expr(self, text, line, allowed=None):
        try:
            e = parse(text)
        except ParseError as exc:
            self.fail(f"bad expression {text!r}: {exc}", line)
        if allowed is not None:
            unknown = sorted(free_symbols(e) - set(allowed))
            if unknown:
                self.fail(f"unknown variable(s) {', '.join(unknown)} in {text!r}", line)
        return e

    def number(self, text, line):
        e = self.expr(text, line, allowed=())
        return float(evaluate(e, {}))

    def single(self, kind):
        found = [s for s in self.sections if s["kind"] == kind]
        if len(found) > 1:
            self.fail(f"section [{kind}] appears more than once", found[1]["line"])
        return found[0] if found else None

    def get(self, section, key, required=True, default=None):
        item = section["entries"].get((key, None))
        if item is None:
            if required:
                self.fail(f"[{section['kind']}] is missing '{key}'", section["line"])
            return default, None
        return item

    def check_keys(self, section, allowed):
        for (key, qual), item in section["entries"].items():
            line = item[0][1] if isinstance(item, list) else item[1]
            if key not in allowed:
                self.fail(f"unknown key {key!r} in [{section['kind']}]", line)
            if qual is not None and key != "row":
                self.fail(f"key {key!r} takes no qualifier", line)

    def chart(self, sec, dim):
        self.check_keys(sec, {"coords", "domain", "embed", "margin", "periodic", "projection", "conformal_scale"})
        text, line = self.get(sec, "coords")
        coords = tuple(_split_list(text))
        for c in coords:
            if not _NAME.match(c):
                self.fail(f"bad coordinate name {c!r}", line)
        if len(set(coords)) != len(coords):
            self.fail("repeated coordinate name", line)
        if len(coords) != dim:
            self.fail(f"chart {sec['name']} has {len(coords)} coordinates, manifold dim is {dim}", line)
        doms = sec["entries"].get(("domain", None), [])
        if len(doms) != dim:
            self.fail(f"chart {sec['name']} needs {dim} domain lines, got {len(doms)}", sec["line"])
        domain = []
        for text, line in doms:
            parts = _split_list(text)
            if len(parts) != 2:
                self.fail("domain line needs 'low, high'", line)
            lo, hi = (self.number(p, line) for p in parts)
            if not lo < hi:
                self.fail(f"empty domain interval [{lo}, {hi}]", line)
            domain.append((lo, hi))
        embeds = sec["entries"].get(("embed", None), [])
        if len(embeds) < dim:
            self.fail(f"chart {sec['name']} needs at least {dim} embed lines", sec["line"])
        embedding = tuple(self.expr(t, ln, coords) for t, ln in embeds)
        margin_text, line = self.get(sec, "margin", required=False)
        margin = self.number(margin_text, line) if margin_text is not None else 0.0
        periodic_text, line = self.get(sec, "periodic", required=False, default="no")
        if periodic_text not in ("yes", "no"):
            self.fail("periodic must be yes or no", line)
        projection, line = self.get(sec, "projection", required=False)
        if projection is not None and projection not in ("stereographic-north", "stereographic-south"):
            self.fail(f"unknown projection {projection!r}", line)
        scale_text, line = self.get(sec, "conformal_scale", required=False)
        scale = self.expr(scale_text, line, coords) if scale_text is not None else None
        return Chart(
            name=sec["name"],
            coords=coords,
            domain=tuple(domain),
            embedding=embedding,
            margin=margin,
            conformal_scale=scale,
            projection=projection,
            periodic=periodic_text == "yes",
        )

    def structure(self, sec, charts):
        self.check_keys(sec, {"builtin", "row"})
        tag, line = self.get(sec, "builtin", required=False)
        rows = {q: v for (k, q), v in sec["entries"].items() if k == "row"}
        if tag is not None:
            if rows:
                self.fail("[structure] takes either 'builtin' or 'row' lines, not both", line)
            try:
                return structure_from_tag(tag)
            except ValueError as exc:
                self.fail(str(exc), line)
        if None in rows:
            self.fail("row lines need a chart name: 'row NAME = ...'", rows[None][0][1])
        components = {}
        for chart in charts:
            lines = rows.pop(chart.name, None)
            if lines is None:
                self.fail(f"no J rows for chart {chart.name}", sec["line"])
            if len(lines) != chart.dim:
                self.fail(f"chart {chart.name}: J needs {chart.dim} rows, got {len(lines)}", lines[-1][1])
            arr = np.empty((chart.dim, chart.dim), dtype=object)
            for i, (text, ln) in enumerate(lines):
                entries = _split_list(text)
                if len(entries) != chart.dim:
                    self.fail(f"row has {len(entries)} entries, expected {chart.dim}", ln)
                for j, t in enumerate(entries):
                    arr[i, j] = self.expr(t, ln, chart.coords)
            components[chart.name] = arr
        if rows:
            self.fail(f"J rows for unknown chart(s) {', '.join(sorted(rows))}", sec["line"])
        return ChartComponents(components, label="spec-file")

    def build(self) -> ManifoldSpec:
        man = self.single("manifold")
        if man is None:
            self.fail("missing [manifold] section")
        self.check_keys(man, {"name", "dim", "description"})
        name, line = self.get(man, "name")
        if not _NAME.match(name):
            self.fail(f"bad manifold name {name!r}", line)
        dim_text, line = self.get(man, "dim")
        if not dim_text.isdigit() or int(dim_text) < 2:
            self.fail("dim must be a positive integer", line)
        dim = int(dim_text)
        if dim % 2:
            self.fail(f"dim must be even for an almost complex structure, got {dim}", line)
        description, _ = self.get(man, "description", required=False, default="")

        chart_secs = [s for s in self.sections if s["kind"] == "chart"]
        if not chart_secs:
            self.fail("no [chart NAME] section")
        names = [s["name"] for s in chart_secs]
        if len(set(names)) != len(names):
            self.fail("duplicate chart names")
        charts = tuple(self.chart(s, dim) for s in chart_secs)
        n_amb = {c.ambient_dim for c in charts}
        if len(n_amb) != 1:
            self.fail("charts embed into different ambient dimensions")
        ambient = [f"X{k + 1}" for k in range(n_amb.pop())]

        sec = self.single("structure")
        if sec is None:
            self.fail("missing [structure] section")
        structure = self.structure(sec, charts)

        conformal = None
        met = self.single("metric")
        if met is not None:
            self.check_keys(met, {"conformal"})
            text, line = self.get(met, "conformal", required=False)
            if text is not None:
                conformal = self.expr(text, line, ambient)

        quad = self.single("quadrature")
        if quad is None:
            self.fail("missing [quadrature] section")
        self.check_keys(quad, {"type", "resolution"})
        kind, line = self.get(quad, "type")
        if kind not in ("torus", "sphere"):
            self.fail(f"quadrature type must be torus or sphere, got {kind!r}", line)
        if kind == "sphere" and {c.projection for c in charts} != {"stereographic-north", "stereographic-south"}:
            self.fail("sphere quadrature needs charts with projection stereographic-north and stereographic-south", line)
        if kind == "torus" and len(charts) != 1:
            self.fail("torus quadrature needs exactly one chart", line)
        res_text, line = self.get(quad, "resolution")
        if not res_text.isdigit() or int(res_text) < 2:
            self.fail("resolution must be an integer >= 2", line)
        exact = None
        if kind == "sphere" and conformal is None:
            exact = 2 * math.pi ** ((dim + 1) / 2) / math.gamma((dim + 1) / 2)
        return ManifoldSpec(
            name=name,
            dim=dim,
            charts=charts,
            structure=structure,
            conformal=conformal,
            quadrature=kind,
            resolution=int(res_text),
            description=description,
            exact_volume=exact,
        )


def loads(text: str, source: str = "<spec>") -> ManifoldSpec:
    return _Builder(_read_sections(text, source), source).build()


def load(path) -> ManifoldSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecFileError(f"cannot read spec file: {exc.strerror}", source=str(path)) from None
    return loads(text, str(path))
