#!/usr/bin/env python3
"""Run the desk-scale regime experiments behind the acceptance checks.

Each config under scripts/configs/ is one regime at the scale the checks
use; reports land in <out-root>/<name>/ as summary.json + records.csv.
Exit code 1 from a run means some tolerance flag failed but the data was
written — expected for the regimes whose asymptotic targets are out of
reach at n = 10^6 (see the tolerance discussion in the README).
"""

import argparse
import sys
import time
from pathlib import Path

from hubperc.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parent / "configs"
RUN_ORDER = ("subcritical", "supercritical", "limit_compare", "scan", "critical")


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-root", default="acceptance_runs",
                    help="directory receiving one subdirectory per regime")
    ap.add_argument("--only", choices=RUN_ORDER, default=None,
                    help="run a single named config instead of all of them")
    ap.add_argument("--smoke", action="store_true",
                    help="use the down-scaled critical config (seconds, not minutes)")
    return ap.parse_args()


def main():
    args = parse_args()
    names = [args.only] if args.only else list(RUN_ORDER)
    if args.smoke:
        names = ["critical_smoke" if n == "critical" else n for n in names]
    out_root = Path(args.out_root)
    worst = 0
    for name in names:
        cfg = CONFIG_DIR / f"{name}.cfg"
        out_dir = out_root / name
        t0 = time.perf_counter()
        code = cli_main(["experiment", "--config", str(cfg), "--out", str(out_dir)])
        print(f"[{name}] exit={code} elapsed={time.perf_counter() - t0:.0f}s -> {out_dir}")
        if code >= 2:
            sys.exit(code)
        worst = max(worst, code)
    sys.exit(worst)


if __name__ == "__main__":
    main()
