"""Regenerate the eccentricity sweeps and the corner-limit table under results/.

    python3 scripts/reproduce_sweeps.py [--steps 19]
"""

import argparse
from pathlib import Path

from ptolemy_constants.experiments import limit_table, run_sweep, sweep_eps, write_sweep_csv
from ptolemy_constants.optimizer import OptimizeOptions

RESULTS = Path(__file__).resolve().parents[1] / "results"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=19)
    ap.add_argument("--eps-max", type=float, default=0.9)
    args = ap.parse_args()
    RESULTS.mkdir(exist_ok=True)
    opts = OptimizeOptions()

    for family in ("ellipse", "rectangle"):
        records, notes = run_sweep(family, sweep_eps(0.0, args.eps_max, args.steps), opts)
        path = RESULTS / f"sweep_{family}.csv"
        with path.open("w", newline="") as fh:
            write_sweep_csv(records, fh)
        errs = [r.abs_error for r in records if r.abs_error is not None]
        secs = sum(r.seconds for r in records)
        print(f"{family:9s} rows={len(records)} max_abs_error={max(errs):.3e} seconds={secs:.1f}")
        for note in notes:
            print("  " + note)

    table = limit_table(0.0, 0.1, 0.5, 10)
    path = RESULTS / "limit_eps0.csv"
    with path.open("w") as fh:
        fh.write("delta,ratio,abs_gap\n")
        for row in zip(table.deltas, table.ratios, table.gaps):
            fh.write(",".join(f"{v:.10g}" for v in row) + "\n")
    print(f"limit     monotone={table.monotone} order={table.order:.4f}")
    print(f"gap to sqrt(2) at delta={table.deltas[-1]:.3g}: {table.gaps[-1]:.3e}")


if __name__ == "__main__":
    main()
