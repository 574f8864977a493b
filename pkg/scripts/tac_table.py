"""Tree-auto-coemission of the PCP union grammar G0 for n = 1..N pairs.

Prints three columns per n: the fixed-point engine, a brute-force sum of
squared derivation weights (one-letter pairs, so a k-step derivation yields
exactly 2k symbols and the truncation error is below (1/4n)^(K+1)), and the
per-side closed form 1/(16n - 4).
"""

import argparse
import math

from pcfgdist.inside import tree_auto_coemission
from pcfgdist.pcp import PcpInstance, construct_g0, tac_closed_form


def tree_sum(n, steps):
    # G0 derivations: choose a side (1/2), then k >= 1 rewrites of weight 1/(2n),
    # each picking one of n pairs; k-step derivations number 2 * n^k
    total = []
    for k in range(1, steps + 1):
        weight = 0.5 * (1.0 / (2 * n)) ** k
        total.append(2 * n ** k * weight * weight)
    return math.fsum(total)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--steps", type=int, default=60)
    args = ap.parse_args()

    print(f"{'n':>3} {'engine':>16} {'tree sum':>16} {'1/(8n-2)':>16} {'1/(16n-4)':>16}")
    for n in range(1, args.max_n + 1):
        inst = PcpInstance(tuple(("a" * i, "b") for i in range(1, n + 1)))
        engine = tree_auto_coemission(construct_g0(inst), tol=1e-14)
        print(f"{n:>3} {engine:>16.12f} {tree_sum(n, args.steps):>16.12f} "
              f"{1 / (8 * n - 2):>16.12f} {tac_closed_form(n):>16.12f}")


if __name__ == "__main__":
    main()
