"""Built-in manifolds with almost complex structures."""
from __future__ import annotations

import math

import numpy as np

from ..expr import Add, Const, Var, parse, power, simplify
from .charts import Chart, ManifoldSpec
from .structures import (
    AmbientEndomorphism,
    ChartComponents,
    ConjugatedStructure,
    CrossProductStructure,
)

STANDARD_BLOCK = [[0.0, -1.0], [1.0, 0.0]]
SKEW_BLOCK = [[1.0, -2.0], [1.0, -1.0]]

S6_PERTURBATION = "X7 + X1*X2"


def _block_diag(block, m):
    out = np.zeros((2 * m, 2 * m))
    for k in range(m):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return out


def torus_chart(m: int) -> Chart:
    if m == 1:
        coords = ("u", "v")
    else:
        coords = tuple(f"{c}{k + 1}" for k in range(m) for c in ("u", "v"))
    emb = []
    for c in coords:
        emb.append(parse(f"cos({c})"))
        emb.append(parse(f"sin({c})"))
    domain = tuple((0.0, 2 * math.pi) for _ in coords)
    return Chart("main", coords, domain, tuple(emb), periodic=True)


def flat_torus(m: int = 1, kind: str = "compatible", name: str | None = None) -> ManifoldSpec:
    """T^{2m} = (S^1)^{2m} in R^{4m} with a constant structure.

    ``kind`` is "compatible" (standard rotation blocks) or "skew" (blocks
    [[1, -2], [1, -1]], which square to -1 but are not orthogonal).
    """
    chart = torus_chart(m)
    block = STANDARD_BLOCK if kind == "compatible" else SKEW_BLOCK
    J = ChartComponents.uniform(_block_diag(block, m), [chart.name], label=f"constant-{kind}")
    suffix = "" if kind == "compatible" else "_skew"
    if kind == "compatible":
        known, e = ("compatible", "kahler", "harmonic", "integrable", "flat"), float(m)
    else:
        known, e = ("non-compatible", "harmonic", "integrable", "flat"), 3.5 * m
    return ManifoldSpec(
        name=name or f"flat_torus_{2 * m}{suffix}",
        dim=2 * m,
        charts=(chart,),
        structure=J,
        quadrature="torus",
        resolution=32 if m == 1 else 8,
        description=f"flat {2 * m}-torus, constant {kind} J",
        known=known,
        constants=dict(e=e, grad2=0.0, S=0.0, T1=0.0, T2=0.0),
        exact_volume=(2 * math.pi) ** (2 * m),
    )


def sphere_charts(d: int) -> tuple:
    """Stereographic charts from the north and south poles of the unit S^d."""
    coords = tuple(f"x{k + 1}" for k in range(d))
    xs = [Var(c) for c in coords]
    r2 = Add(*[power(x, 2) for x in xs])
    denom = Add(Const(1.0), r2)
    scale = simplify(Const(4.0) * power(denom, -2))
    charts = []
    for name, sign in (("north", 1.0), ("south", -1.0)):
        emb = [simplify(Const(2.0) * x / denom) for x in xs]
        emb.append(simplify(Const(sign) * (r2 - Const(1.0)) / denom))
        charts.append(
            Chart(
                name=name,
                coords=coords,
                domain=tuple((-1.25, 1.25) for _ in coords),
                embedding=tuple(emb),
                margin=0.25,
                conformal_scale=scale,
                projection=f"stereographic-{name}",
            )
        )
    return tuple(charts)


def round_sphere(d: int, name: str | None = None, conformal=None, structure=None, **kw) -> ManifoldSpec:
    charts = sphere_charts(d)
    if isinstance(conformal, str):
        conformal = parse(conformal)
    return ManifoldSpec(
        name=name or f"round_sphere_{d}",
        dim=d,
        charts=charts,
        structure=structure or CrossProductStructure(),
        conformal=conformal,
        quadrature="sphere",
        resolution=kw.pop("resolution", 32 if d == 2 else 4),
        volume_resolution=kw.pop("volume_resolution", 32 if d == 2 else 12),
        **kw,
    )


def round_sphere_2() -> ManifoldSpec:
    return round_sphere(
        2,
        "round_sphere_2",
        description="unit S^2, J = rotation by +90 degrees (Kahler)",
        known=("compatible", "kahler", "harmonic", "integrable"),
        constants=dict(e=1.0, grad2=0.0, S=2.0, T1=2.0, T2=2.0),
        exact_volume=4 * math.pi,
    )


def s6_octonionic() -> ManifoldSpec:
    return round_sphere(
        6,
        "s6_octonionic",
        description="unit S^6, J_p(v) = p x v from the octonions",
        known=("compatible", "non-integrable", "non-harmonic"),
        constants=dict(e=3.0, grad2=24.0, S=30.0, T1=30.0, T2=6.0),
        exact_volume=16 * math.pi**3 / 15,
    )


def _perturbed_volume(eps: float) -> float:
    """Volume of S^6 under (1 + eps*(X7 + X1*X2)) * round.

    The density is (1 + eps*phi)^3; odd moments of phi vanish and
    int phi^2 = V/7 + V/63 on the unit S^6.
    """
    return 16 * math.pi**3 / 15 * (1 + 3 * eps**2 * (1 / 7 + 1 / 63))


def s6_perturbed(eps: float = 0.1, phi: str = S6_PERTURBATION, name: str | None = None) -> ManifoldSpec:
    return round_sphere(
        6,
        name or "s6_perturbed",
        conformal=f"1 + {eps!r}*({phi})",
        description=f"S^6 with metric (1 + {eps}*({phi})) * round, octonionic J",
        known=("compatible", "non-integrable", "non-harmonic"),
        exact_volume=_perturbed_volume(eps) if phi == S6_PERTURBATION else None,
    )


TORUS_TWIST = [["sin(v)", "cos(u)"], ["sin(u + v)", "0.5*cos(v)"]]
SPHERE2_TWIST = [["X1", "X2*X3", "0"], ["0", "X3", "X1^2"], ["X2", "0", "X1*X3"]]


def flat_torus_2_twisted(eps: float = 0.3) -> ManifoldSpec:
    chart = torus_chart(1)
    base = ChartComponents.uniform(STANDARD_BLOCK, [chart.name], label="constant-compatible")
    B = ChartComponents.uniform(TORUS_TWIST, [chart.name], label="twist")
    return ManifoldSpec(
        name="flat_torus_2_twisted",
        dim=2,
        charts=(chart,),
        structure=ConjugatedStructure(base, B, eps),
        quadrature="torus",
        resolution=32,
        description=f"flat 2-torus, J = A J0 A^-1 with A = id + {eps}*B(u, v)",
        known=("non-compatible", "flat"),
        constants=dict(S=0.0, T1=0.0, T2=0.0),
        exact_volume=(2 * math.pi) ** 2,
    )


def round_sphere_2_twisted(eps: float = 0.3) -> ManifoldSpec:
    B = AmbientEndomorphism(np.array(SPHERE2_TWIST, dtype=object), label="twist")
    return round_sphere(
        2,
        "round_sphere_2_twisted",
        structure=ConjugatedStructure(CrossProductStructure(), B, eps),
        description=f"unit S^2, Kahler J conjugated by id + {eps}*B(p)",
        known=("non-compatible",),
        constants=dict(S=2.0, T2=2.0),
        exact_volume=4 * math.pi,
    )


def zoo() -> dict:
    """Named built-in manifolds, alphabetical."""
    members = [
        flat_torus(1, "compatible"),
        flat_torus(1, "skew"),
        flat_torus(2, "compatible"),
        flat_torus_2_twisted(),
        round_sphere_2(),
        round_sphere_2_twisted(),
        s6_octonionic(),
        s6_perturbed(),
    ]
    return {m.name: m for m in sorted(members, key=lambda m: m.name)}


def get(name: str) -> ManifoldSpec:
    members = zoo()
    if name not in members:
        raise KeyError(f"unknown manifold {name!r}; known: {', '.join(members)}")
    return members[name]
