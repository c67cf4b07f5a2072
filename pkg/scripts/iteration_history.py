"""Solve the four-heading lunar example and print the iteration history."""

import argparse
from pathlib import Path

from hodoiod.cli import read_observations
from hodoiod.hodograph import MOON
from hodoiod.solver import solve

DEFAULT_OBS = Path(__file__).resolve().parents[1] / "configs" / "lunar" / "reference_observations.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("observations", nargs="?", default=str(DEFAULT_OBS))
    args = ap.parse_args()

    rep = solve(read_observations(args.observations), MOON)
    print(f"{'m':>3} {'R':>8} {'c1':>8} {'c2':>8} {'residual [s^2]':>16}")
    for rec in rep.history:
        print(f"{rec.m:>3d} {rec.x[0]:8.4f} {rec.x[1]:8.4f} {rec.x[2]:8.4f} {rec.objective:16.6g}")
    el = rep.elements
    print(f"\nconverged={rep.converged}  c={rep.hodograph.c.round(4).tolist()}  w={rep.hodograph.w_hat.round(4).tolist()}")
    print(f"a={el.a:.2f} km  e={el.e:.4f}")


if __name__ == "__main__":
    main()
