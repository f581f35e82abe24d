"""Large-t decay of ||p_t * mu||_{L^{2,1}} for closed curves in the plane.

A closed loop carries zero net vector mass, so far from the curve the
smoothed measure looks like ``A grad p_t`` (``A`` the signed enclosed area)
and the Lorentz norm decays like ``t^{-1}``.  The script prints the local
slope over successive decades next to the ``A |grad p_t|`` prediction.

    python3 scripts/large_time_decay.py --radius 1 --decades 0 4
"""

from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

import numpy as np

from endpoint_l1.fitting import loglog_slope
from endpoint_l1.grid import GridSpec, SampledField
from endpoint_l1.loops import Loop, heat_loop_norms
from endpoint_l1.lorentz import LorentzParams, distribution_profile, lorentz_norm


@dataclass
class DecayConfig:
    radius: float = 1.0
    first_decade: int = 0
    last_decade: int = 4
    nodes_per_decade: int = 3
    segments: int = 256


def dipole_norm(area: float, t: float, n: int = 512) -> float:
    """``||A |grad p_t| ||_{L^{2,1}}`` on a box wide enough to hold the Gaussian."""
    g = GridSpec(2, 24 * math.sqrt(t), n)
    r = np.asarray(g.radius())
    grad = r / (2 * t) * np.exp(-r**2 / (4 * t)) / (4 * math.pi * t)
    return lorentz_norm(distribution_profile(SampledField(g, abs(area) * grad)), LorentzParams(2.0, 1.0))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=float, default=DecayConfig.radius)
    ap.add_argument("--decades", type=int, nargs=2, default=(DecayConfig.first_decade, DecayConfig.last_decade))
    ap.add_argument("--nodes-per-decade", type=int, default=DecayConfig.nodes_per_decade)
    a = ap.parse_args(argv)
    cfg = DecayConfig(a.radius, a.decades[0], a.decades[1], a.nodes_per_decade)

    loop = Loop.circle(cfg.radius, cfg.segments)
    area = math.pi * cfg.radius**2
    m = (cfg.last_decade - cfg.first_decade) * cfg.nodes_per_decade
    t = cfg.radius**2 * np.logspace(cfg.first_decade, cfg.last_decade, m + 1)
    norms = np.array([heat_loop_norms(loop, tj, 2.0, 1.0) for tj in t])
    dip = np.array([dipole_norm(area, tj) for tj in t])
    print(f"{'t':>12} {'||p_t*mu||':>14} {'A|grad p_t|':>14} {'ratio':>8}")
    for row in zip(t, norms, dip):
        print(f"{row[0]:12.4g} {row[1]:14.6g} {row[2]:14.6g} {row[1] / row[2]:8.4f}")
    k = cfg.nodes_per_decade
    for j in range(0, m, k):
        fit = loglog_slope(t[j:j + k + 1], norms[j:j + k + 1])
        print(f"slope on [{t[j]:.3g}, {t[j + k]:.3g}]: {fit.slope:+.4f}")


if __name__ == "__main__":
    main()
