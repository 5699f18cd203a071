#!/usr/bin/env python3
"""Run one scenario end to end and print the diagnostics summary.

Usage: python3 scripts/run_default.py [config] [--outdir DIR]
Defaults to configs/default.json next to the repo root.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from kirchheat import load_config, run_scenario

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", default=REPO / "configs" / "default.json")
    ap.add_argument("--outdir", default=None)
    args = ap.parse_args()

    config = load_config(args.config)
    result = run_scenario(config, outdir=args.outdir)
    print(json.dumps(result.diagnostics, indent=2, sort_keys=True))
    print(f"trajectory: {result.csv_path}")
    print(f"diagnostics: {result.json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
