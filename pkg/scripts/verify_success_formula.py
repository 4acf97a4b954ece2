#!/usr/bin/env python3
"""Stress the extrema expression for the success probability on random weights.

Draws random strictly varying weight vectors, compares the extrema-counting
expression against the direct sum of adjacent pairwise minima, and runs the
optimality certificate on every draw.  Prints the worst deviation seen.
"""

import argparse
import sys

import numpy as np

from klm_teleport import (
    SimplexPoint,
    adjacent_minima_sum,
    certify_klm_bound,
    extrema_formula,
)


def random_strict_weights(n: int, rng: np.random.Generator) -> tuple[float, ...]:
    while True:
        draw = rng.dirichlet(np.ones(n + 1))
        weights = tuple(float(w) for w in draw)
        if all(a != b for a, b in zip(weights, weights[1:])):
            return weights


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=5000)
    parser.add_argument("--n-min", type=int, default=2)
    parser.add_argument("--n-max", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if not 2 <= args.n_min <= args.n_max:
        parser.error("need 2 <= --n-min <= --n-max")

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    certified = 0
    for trial in range(args.trials):
        n = args.n_min + trial % (args.n_max - args.n_min + 1)
        weights = random_strict_weights(n, rng)
        diff = abs(extrema_formula(weights) - adjacent_minima_sum(weights))
        worst = max(worst, diff)
        cert = certify_klm_bound(SimplexPoint(weights))
        if cert.applicable and cert.exceeds_threshold and cert.below_bound:
            certified += 1
    print(f"trials:            {args.trials} (n = {args.n_min}..{args.n_max})")
    print(f"worst |formula - minima|: {worst:.3e}")
    print(f"certificates passed:      {certified}/{args.trials}")
    return 0 if worst < 1e-12 and certified == args.trials else 1


if __name__ == "__main__":
    sys.exit(main())
