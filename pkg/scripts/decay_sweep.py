#!/usr/bin/env python3
"""Sweep model parameters and tabulate the fitted decay rate per grid point,
plus the initial-data scaling study at the base point."""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from kirchheat import load_config, sweep

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?", default=REPO / "configs" / "default.json")
    ap.add_argument("grid", nargs="?", default=REPO / "configs" / "sweep_grid.json")
    args = ap.parse_args()

    grid = json.loads(Path(args.grid).read_text())
    sigmas = grid.pop("sigmas", None)
    rows, scale_rows = sweep(load_config(args.config), grid, sigmas=sigmas)

    print(f"{'point':<40} {'omega':>10} {'r^2':>8} {'monotone':>9}  error")
    for row in rows:
        point = ", ".join(f"{k}={v}" for k, v in row.point.items())
        print(f"{point:<40} {row.omega:>10.4f} {row.r_squared:>8.4f} "
              f"{str(row.energy_monotone):>9}  {row.error}")
    if scale_rows:
        print("\ninitial-data scaling at the base point:")
        for sigma, row in zip(sigmas, scale_rows):
            print(f"  sigma={sigma:<8} omega={row.omega:.4f} r^2={row.r_squared:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
