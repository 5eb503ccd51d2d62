"""sievelab command line: run one suite and write a CSV or JSON report."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .report import emit
from .suites import SUITES, RunConfig, run_suite, worker_count

SUITE_HELP = """\
suite defaults:
  verify-lemmas  --p-cap 7 --N 10000 --trials 200
  lsv-sweep      --k 1,2,3 --N 256,1024,4096 --P floor(N^(1/2k)) --trials 1000
  density        --Q 100000
  goldbach-scan  --N 1000000 (deterministic, no seed needed)
  extremal       --N 10000 --alpha 0.5 --budget 20000
  ap-regime      --N 10000 --Q 10 --k 2 --epsilon 0.4 --eta 0.05 --theta 0.1 --alpha 0.5 --c 0.01
every suite except goldbach-scan requires --seed.
"""


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sievelab", description=__doc__, epilog=SUITE_HELP,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--suite", required=True, choices=SUITES)
    ap.add_argument("--seed", type=int)
    for name in ("N", "Q", "P", "k"):
        ap.add_argument(f"--{name}", type=int)
    for name in ("alpha", "c", "epsilon", "eta", "theta"):
        ap.add_argument(f"--{name}", type=float)
    ap.add_argument("--p-cap", type=int, dest="p_cap", help="largest prime for exhaustive checks (<= 11)")
    ap.add_argument("--trials", type=int, help="random instances per cell")
    ap.add_argument("--budget", type=int, help="search node budget")
    ap.add_argument("--out", help="report path (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k not in ("out", "format")}
    cfg = RunConfig(**fields)
    try:
        cfg.validate()
        worker_count()
    except ValueError as exc:
        parser.error(str(exc))
    rows = run_suite(cfg)
    try:
        text = emit(rows, args.out, args.format)
    except OSError as exc:
        print(f"sievelab: cannot write report: {exc}", file=sys.stderr)
        return 2
    if args.out is None:
        sys.stdout.write(text)
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL {r.suite} {r.instance}: lhs={r.lhs} rhs={r.rhs}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
