"""Besov majorant of a figure-eight against its two lobes taken separately.

Both lobes have the same radius but opposite orientation, so their
smoothed measures partly cancel at large t.  The majorant of the whole
therefore stays below the lobes' sum.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from endpoint_l1.loops import Loop, besov_majorant_loop


@dataclass
class LobeConfig:
    radius: float = 1.0
    segments_per_lobe: int = 64
    nodes_per_decade: int = 2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=float, default=LobeConfig.radius)
    ap.add_argument("--segments-per-lobe", type=int, default=LobeConfig.segments_per_lobe)
    ap.add_argument("--nodes-per-decade", type=int, default=LobeConfig.nodes_per_decade)
    cfg = LobeConfig(**{k.replace("-", "_"): v for k, v in vars(ap.parse_args(argv)).items()})

    a, b = Loop.figure_eight_lobes(cfg.radius, cfg.segments_per_lobe)
    whole = Loop.figure_eight(cfg.radius, cfg.segments_per_lobe)
    # default t nodes span R^2 [1e-4, 1e4] with R the radius of each curve
    kw = dict(nodes_per_decade=cfg.nodes_per_decade)
    ma, mb, mw = (besov_majorant_loop(x, **kw).value for x in (a, b, whole))
    print(f"lobe A   {ma:.6g}\nlobe B   {mb:.6g}\nwhole    {mw:.6g}")
    print(f"whole / (A + B) = {mw / (ma + mb):.4f}")


if __name__ == "__main__":
    main()
