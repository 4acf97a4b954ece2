#!/usr/bin/env python3
"""Sweep resource sizes and tabulate how success and fidelity scale.

For each n the script reports the uniform-state success probability n/(n+1),
the uniform and optimized Haar-average fidelities, and the scaled deficits
(1 - F) * (n+1) and (1 - F_opt) * (n+2)^2, which should hover near constants
if the 1/(n+1) and 1/(n+2)^2 scaling laws hold.
"""

import argparse
import sys

from klm_teleport import (
    ResourceCoefficients,
    SimplexPoint,
    avg_fidelity_closed_form,
    maximize,
    p_success_total_brute,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-min", type=int, default=1)
    parser.add_argument("--n-max", type=int, default=8)
    parser.add_argument("--budget", type=int, default=60_000)
    parser.add_argument("--restarts", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if not 1 <= args.n_min <= args.n_max:
        parser.error("need 1 <= --n-min <= --n-max")

    header = (
        f"{'n':>3} {'p_success':>10} {'F_uniform':>10} {'F_opt':>10} "
        f"{'(1-F_u)(n+1)':>13} {'(1-F_o)(n+2)^2':>15}"
    )
    print(header)
    print("-" * len(header))
    for n in range(args.n_min, args.n_max + 1):
        p_success = p_success_total_brute(ResourceCoefficients.uniform(n))
        f_uniform = avg_fidelity_closed_form(SimplexPoint.uniform(n))
        report = maximize(
            "avg_fidelity",
            n,
            budget=args.budget,
            seed=args.seed + n,
            restarts=args.restarts,
            mc_samples=10_000,
        )
        f_opt = report.best_value
        print(
            f"{n:>3} {p_success:>10.6f} {f_uniform:>10.6f} {f_opt:>10.6f} "
            f"{(1 - f_uniform) * (n + 1):>13.6f} {(1 - f_opt) * (n + 2) ** 2:>15.6f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
