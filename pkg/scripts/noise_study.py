"""Monte Carlo error study for the lunar example at 4 and 10 observations.

Prints one row per (observations, noise) cell with 1-sigma a and e errors.
"""

import argparse
import time

from hodoiod.hodograph import MOON
from hodoiod.montecarlo import SUMMARY_FIELDS, McConfig, rows_to_csv, run_monte_carlo, summarize
from hodoiod.simulate import LUNAR_FOUR_ANOMALIES, LUNAR_TEN_ANOMALIES, Scenario, lunar_example_elements


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20230101)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", help="also write the summary CSV here")
    args = ap.parse_args()

    rows = []
    t0 = time.perf_counter()
    for anomalies in (LUNAR_FOUR_ANOMALIES, LUNAR_TEN_ANOMALIES):
        cfg = McConfig(Scenario(lunar_example_elements(), MOON, anomalies), args.trials, (1.0, 0.5, 0.1), args.seed)
        rows += summarize(run_monte_carlo(cfg, workers=args.workers))
    print(f"{'obs':>4} {'noise':>6} {'a err [km]':>11} {'e err':>8} {'failures':>9}")
    for r in rows:
        print(f"{r['n_observations']:>4d} {r['noise_deg']:>6.1f} {r['a_err_sigma_km']:>11.4f} "
              f"{r['e_err_sigma']:>8.4f} {r['failures']:>9d}")
    print(f"({time.perf_counter() - t0:.0f} s)")
    if args.csv:
        with open(args.csv, "w", newline="\n") as fh:
            fh.write(rows_to_csv(rows, SUMMARY_FIELDS))


if __name__ == "__main__":
    main()
