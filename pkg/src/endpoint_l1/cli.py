"""``endpoint-l1 run <config.json>`` and ``endpoint-l1 suite <name>``.

Exit codes: 0 when every check passes, 2 when a tolerance check fails,
1 for configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

log = logging.getLogger("endpoint_l1")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="endpoint-l1", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for suites")
    common.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
    common.add_argument("-q", "--quiet", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one experiment config")
    r.add_argument("config", type=Path)
    s = sub.add_parser("suite", parents=[common], help="run an acceptance suite")
    s.add_argument("name", help="identities, exponents, constructions, cocancel, hodge or all")
    sub.add_parser("list", help="list packaged configs and suites")
    return ap


def _print_report(rep) -> None:
    status = "PASS" if rep.passed else "FAIL"
    crit = f"criterion {rep.config.criterion}" if rep.config.criterion else "unnumbered"
    print(f"[{status}] {rep.config.id} ({crit}, {rep.runtime_s:.1f} s)")
    for c in rep.checks:
        print(f"    {'ok ' if c.passed else 'BAD'} {c.describe()}")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
                        format="%(levelname)s %(message)s")
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    # BLAS pools in worker processes follow this; FFTs are single-threaded anyway
    if getattr(args, "threads", None):
        os.environ.setdefault("OMP_NUM_THREADS", "1")

    from . import experiments as ex

    try:
        if args.command == "list":
            print("configs:", " ".join(ex.packaged_config_ids()))
            for name, ids in ex.SUITES.items():
                print(f"suite {name}: {' '.join(ids)}")
            return 0
        if args.command == "run":
            cfg = ex.load_config(args.config).with_seed(args.seed)
            rep = ex.run(cfg)
            out = ex.write_report(rep, args.out)
            if not args.quiet:
                _print_report(rep)
                print(f"report written to {out}")
            return rep.exit_code
        reports = ex.run_suite(args.name, seed=args.seed, threads=args.threads)
        path = ex.write_summary(reports, args.out, args.name)
        if not args.quiet:
            for rep in reports:
                _print_report(rep)
            print(f"summary written to {path}")
        return 0 if all(r.passed for r in reports) else 2
    except ex.ConfigError as exc:
        print(f"config error at {exc.path}: {str(exc)[len(exc.path) + 2:]}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
