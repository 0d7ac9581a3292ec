"""Held-out residual of the ball synthesis for (z1 + z2)/sqrt(2) as the sample count grows.

The de Branges kernel of this function has infinite rank, so a finite sample
only approximates it; the table shows how the held-out residual decays.

    python3 scripts/ball_linear_sample_sweep.py [--counts 6 20 40 80 160] [--seed 3]
"""
import argparse

import numpy as np

from schurkit.realization import lurking_isometry_ball
from schurkit.sampling import random_ball_points


def f(z):
    return np.array([[(z[0] + z[1]) / np.sqrt(2)]])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--counts", type=int, nargs="*", default=[6, 20, 40, 80, 160])
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    held = random_ball_points(rng, 25, 2)
    print(f"{'samples':>8} {'state':>6} {'flavor':>12} {'fit':>10} {'heldout':>10}")
    for count in args.counts:
        pts = random_ball_points(rng, count, 2)
        res = lurking_isometry_ball(pts, [f(z) for z in pts], heldout=(held, f))
        U = res.colligation
        print(f"{count:8d} {U.n:6d} {U.flavor:>12} {res.fit_residual:10.2e} {res.heldout_residual:10.2e}")


if __name__ == "__main__":
    main()
