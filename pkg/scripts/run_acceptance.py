"""Run the packaged acceptance configs and print one line per criterion.

    python3 scripts/run_acceptance.py --suite all --threads 4 --out results
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from endpoint_l1 import experiments as ex


@dataclass
class AcceptanceConfig:
    suite: str = "all"
    threads: int = 1
    out: Path = Path("results")
    seed: int | None = None


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suite", default=AcceptanceConfig.suite, choices=sorted(ex.SUITES))
    ap.add_argument("--threads", type=int, default=AcceptanceConfig.threads)
    ap.add_argument("--out", type=Path, default=AcceptanceConfig.out)
    ap.add_argument("--seed", type=int, default=None)
    cfg = AcceptanceConfig(**vars(ap.parse_args(argv)))
    reports = ex.run_suite(cfg.suite, seed=cfg.seed, threads=cfg.threads)
    for rep in sorted(reports, key=lambda r: r.config.criterion or 0):
        bad = [c.describe() for c in rep.checks if not c.passed]
        status = "PASS" if not bad else "FAIL"
        print(f"[{status}] criterion {rep.config.criterion}: {rep.config.id}" + (f"  {'; '.join(bad)}" if bad else ""))
        ex.write_report(rep, cfg.out)
    print("summary:", ex.write_summary(reports, cfg.out, cfg.suite))
    return 0 if all(r.passed for r in reports) else 2


if __name__ == "__main__":
    sys.exit(main())
