"""Verify policy monotonicity across the slow-decay variants where renewal
timing reshapes the optimal policy: short renewal downtime breaks
information-age monotonicity, longer downtime narrows the renewal band, and
heavier per-transmission wear restores monotonicity.

Usage: python scripts/run_monotonicity_study.py [--out DIR]
"""

import argparse
import json
import sys
from pathlib import Path

from wearsched.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
VARIANTS = ["slow-decay-short-renewal", "slow-decay-long-renewal", "heavy-wear"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/monotonicity")
    args = parser.parse_args()
    worst = 0
    for name in VARIANTS:
        out = Path(args.out) / name
        code = cli_main(
            ["verify", "--config", str(CONFIG_DIR / f"{name}.yaml"), "--out", str(out)]
        )
        worst = max(worst, code)
        if code == 0:
            report = json.loads((out / "verify.json").read_text())
            counts = {c["kind"]: c["violation_count"] for c in report["checks"]}
            print(
                f"{name}: aoi-violations={counts['policy-monotone-aoi']} "
                f"aoc-violations={counts['policy-monotone-aoc']}",
                file=sys.stderr,
            )
    return worst


if __name__ == "__main__":
    sys.exit(main())
