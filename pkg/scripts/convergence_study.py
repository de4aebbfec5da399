"""Quadrature convergence table for one quantity on one manifold.

Wraps the same routine used by ``bochner-lab convergence`` and prints the
value and the error against the finest resolution for each grid.
"""
import argparse
from dataclasses import dataclass, field

from bochner_lab.cli import CONVERGENCE_QUANTITIES, convergence_table, resolve


@dataclass(frozen=True)
class Config:
    manifold: str = "s6"
    quantity: str = "volume"
    resolutions: list = field(default_factory=lambda: [3, 6, 9, 12])
    seed: int = 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--manifold", default=Config.manifold)
    ap.add_argument("--quantity", choices=CONVERGENCE_QUANTITIES, default=Config.quantity)
    ap.add_argument("--resolutions", type=lambda s: [int(x) for x in s.split(",")], default=[3, 6, 9, 12])
    ap.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(**vars(ap.parse_args(argv)))

    spec = resolve(cfg.manifold)
    print(f"{cfg.quantity} on {spec.name}")
    print(f"{'resolution':>10} {'value':>22} {'error':>10}")
    for r, value, err in convergence_table(spec, cfg.quantity, cfg.resolutions, cfg.seed):
        print(f"{r:>10d} {value:>22.15g} {err:>10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
