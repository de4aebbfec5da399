"""Tolerance profiles.

Two error sources are kept apart: pointwise identities are limited by
floating-point rounding in the jet pipeline, integrals by quadrature.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-10  # quantities that vanish identically on flat fixtures
    identity: float = 1e-6  # Bochner and Weitzenbock residuals
    kahler: float = 1e-8  # max |nabla J| for a Kahler structure
    constants: float = 1e-7  # closed-form curvature constants at every node
    hermitian: float = 1e-7  # almost-Hermitian identities, Nijenhuis trace
    d_squared: float = 1e-7
    harmonic_integrable: float = 1e-7
    integral_zero: float = 1e-7  # integrals that vanish exactly
    quadrature_rel: float = 1e-4  # integral identities, relative
    volume_rel: float = 1e-6
    energy: float = 1e-12
    invariance: float = 1e-7  # chart overlap and frame rotation, relative
    witness: float = 0.1  # minimum |N(e1, e2)| for a non-integrability witness
    harmonic: float = 1e-8  # (dJ, dJ) + (delta J, delta J)
    integrable: float = 1e-6  # max sampled |N|
    balanced: float = 1e-10  # max |delta J|^2 for the balanced branch

    def as_dict(self) -> dict:
        return asdict(self)


PROFILES = {
    "default": Tolerances(),
    "strict": Tolerances(
        identity=1e-9,
        kahler=1e-10,
        constants=1e-10,
        hermitian=1e-10,
        d_squared=1e-10,
        harmonic_integrable=1e-10,
        integral_zero=1e-10,
        quadrature_rel=1e-6,
        invariance=1e-9,
        harmonic=1e-12,
        integrable=1e-9,
    ),
}


def profile(name: str) -> Tolerances:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown tolerance profile {name!r}; choose from {', '.join(PROFILES)}") from None
