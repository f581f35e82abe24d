"""Where the displayed lower bound for the radial step sequence holds.

For each (q, d) the script reports the N at which the exact
``||u_N||^q`` in ``L^{d/(d-1), q}`` first drops below the closed-form lower bound.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np

from endpoint_l1.constructions import RadialStepFunction, alvino_lower_bound


@dataclass
class ScanConfig:
    qs: list[float] = field(default_factory=lambda: [round(x, 2) for x in np.arange(0.1, 1.0, 0.05)])
    dims: list[int] = field(default_factory=lambda: [2, 3])
    N_max: int = 1024


def first_violation(q: float, d: int, N_max: int) -> int | None:
    for N in range(1, N_max + 1):
        if RadialStepFunction(N, q, d).lorentz_q() < alvino_lower_bound(N, q, d):
            return N
    return None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N-max", type=int, default=ScanConfig.N_max)
    cfg = ScanConfig(N_max=ap.parse_args(argv).N_max)
    print("q     " + "  ".join(f"d={d:<6}" for d in cfg.dims))
    for q in cfg.qs:
        cells = []
        for d in cfg.dims:
            N = first_violation(q, d, cfg.N_max)
            cells.append(f"{'ok' if N is None else 'N=' + str(N):<8}")
        print(f"{q:<5} " + "  ".join(cells))


if __name__ == "__main__":
    main()
