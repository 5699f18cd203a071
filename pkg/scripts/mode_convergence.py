#!/usr/bin/env python3
"""Mode-refinement study: rerun a scenario at increasing truncation and
tabulate how much the energy history and terminal state move per doubling."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from kirchheat import convergence_study, load_config

REPO = Path(__file__).resolve().parent.parent


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", nargs="?",
                    default=REPO / "configs" / "bump_convergence.json")
    ap.add_argument("--modes", default="8,16,32",
                    help="comma-separated mode counts, strictly increasing")
    args = ap.parse_args()

    mode_counts = [int(tok) for tok in args.modes.split(",")]
    rows = convergence_study(load_config(args.config), mode_counts)

    print(f"{'N':>5} {'N_fine':>7} {'max |dE|':>12} {'|dstate|':>12} {'ratio':>7}")
    prev = None
    for row in rows:
        ratio = "" if prev is None else f"{row.max_energy_diff / prev:.3f}"
        print(f"{row.n_coarse:>5} {row.n_fine:>7} {row.max_energy_diff:>12.3e} "
              f"{row.terminal_state_diff:>12.3e} {ratio:>7}")
        prev = row.max_energy_diff
    return 0


if __name__ == "__main__":
    sys.exit(main())
