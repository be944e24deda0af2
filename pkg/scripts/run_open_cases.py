"""Estimate the constants of the regular hexagon and the Reuleaux triangle.

No closed form is known for either curve, so the script repeats the search
under several seeds and stores every value together with the spread.

    python3 scripts/run_open_cases.py [--seeds 5] [--out results/open_cases.json]
"""

import argparse
import json
import math
from pathlib import Path

from ptolemy_constants.curves import parse_curve
from ptolemy_constants.experiments import open_case
from ptolemy_constants.optimizer import OptimizeOptions

CURVES = ("polygon:6", "reuleaux")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "open_cases.json"))
    args = ap.parse_args()

    opts = OptimizeOptions()
    cases = {}
    for text in CURVES:
        case = open_case(parse_curve(text), args.seeds, opts)
        cases[text] = case
        print(f"{text:10s} best={case['best_value']:.12f} spread={case['spread']:.2e} "
              f"status={case['best_status']}")

    payload = {
        "options": {
            "grid_points": opts.grid_points,
            "starts": opts.starts,
            "value_tolerance": opts.value_tolerance,
            "gap_floor": opts.gap_floor,
        },
        # reference value for comparison only; it is not claimed to be the constant
        "two_over_sqrt3": 2.0 / math.sqrt(3.0),
        "cases": cases,
    }
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
