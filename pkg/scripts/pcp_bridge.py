"""Encode a PCP instance, search for a solution and probe the grammars.

Without arguments the classic instance {(a,baa), (ab,aa), (bba,bb)} is used.
"""

import argparse
from pathlib import Path

from pcfgdist.distance import Metric, ambiguity_certificate, truncated_metric
from pcfgdist.grammar import format_string, serialize
from pcfgdist.pcp import (PcpInstance, construct_g0, construct_pair, encode_solution,
                          solve_pcp_bounded)

CLASSIC = "a baa\nab aa\nbba bb\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("instance", nargs="?", help="file with one 'u v' pair per line")
    ap.add_argument("--budget", type=int, default=8)
    ap.add_argument("--show-grammar", action="store_true")
    args = ap.parse_args()

    text = Path(args.instance).read_text() if args.instance else CLASSIC
    inst = PcpInstance.parse(text)
    g1, g2 = construct_pair(inst)
    g0 = construct_g0(inst)
    if args.show_grammar:
        print(serialize(g0))

    sol = solve_pcp_bounded(inst, args.budget)
    print("solution:", sol)
    if sol:
        w = encode_solution(inst, sol)
        print("encoded string:", format_string(w))
        n = len(w)
    else:
        n = 12
    amb = ambiguity_certificate(g0, max_length=n)
    print("ambiguity:", amb)
    coem = truncated_metric(g1, g2, Metric.COEMISSION, n)
    print(f"COEM(G1, G2) in [{coem.interval.lo:.6g}, {coem.interval.hi:.6g}] at length {n}")


if __name__ == "__main__":
    main()
