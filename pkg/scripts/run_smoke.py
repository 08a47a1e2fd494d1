#!/usr/bin/env python3
"""Quick end-to-end sanity run; finishes in under a minute.

Exercises every subcommand once at small scale and checks the headline
numbers still come out where they should.
"""

import json
import sys
import tempfile
from pathlib import Path

from hubperc.cli import main

CONFIG_DIR = Path(__file__).resolve().parent / "configs"


def run(argv, expect=(0,)):
    print(f"$ hubperc {' '.join(argv)}")
    code = main(argv)
    if code not in expect:
        print(f"unexpected exit code {code} (wanted {expect})", file=sys.stderr)
        sys.exit(1)
    return code


def check():
    tmp = Path(tempfile.mkdtemp(prefix="hubperc_smoke_"))
    run(["constants", "--tau", "2.5", "--C", "1", "--kernel", "nr"])
    run(["simulate", "--n", "20000", "--lam", "0.8", "--seed", "7",
         "--out", str(tmp / "sim")])
    run(["fixedpoint", "--a", "50", "--lam", "0.57", "--n-grid", "512",
         "--two-step-check", "--out", str(tmp / "fp")])
    # smoke-scale statistics sit far from the asymptotic targets, so exit 1
    # (tolerance fail, data written) is acceptable here
    run(["experiment", "--config", str(CONFIG_DIR / "critical_smoke.cfg"),
         "--out", str(tmp / "exp")], expect=(0, 1))
    summary = json.loads((tmp / "exp" / "summary.json").read_text())
    assert summary["replicates"] == 10, summary
    fp = json.loads((tmp / "fp" / "summary.json").read_text())
    assert 0.5 < fp["lambda_c_a"] < 0.6, fp
    print(f"smoke outputs under {tmp}")
    print("smoke OK")


if __name__ == "__main__":
    check()
