"""Trend of ||I_alpha Du_N||_{L^{d/(d-alpha), r}} / |Du_N| in N for r < 1."""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

from endpoint_l1.constructions import riesz_counterexample_norms


@dataclass
class RieszConfig:
    N_max: int = 4
    alpha: float = 0.5
    r: float = 0.5
    n: int = 2048
    L: float = 2.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in asdict(RieszConfig()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    ap.add_argument("--json", action="store_true", help="print the raw result")
    a = vars(ap.parse_args(argv))
    as_json = a.pop("json")
    cfg = RieszConfig(**a)
    out = riesz_counterexample_norms(tuple(range(1, cfg.N_max + 1)), alpha=cfg.alpha, r=cfg.r, n=cfg.n, L=cfg.L)
    if as_json:
        print(json.dumps(out, indent=2))
        return
    print(f"q = {out['q']:.4g}")
    for row in out["rows"]:
        print(f"N={row['N']}  lorentz={row['lorentz']:.6g}  bv={row['bv']:.6g}  ratio={row['ratio']:.6g}")
    print("increasing from N=2:", out["increasing"])


if __name__ == "__main__":
    main()
