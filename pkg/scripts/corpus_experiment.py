"""Interval widths and consensus certification lengths over a random corpus.

For each truncation length n, reports the worst (largest) enclosure width
over all grammar pairs and certifiable metrics, and the distribution of the
lengths at which consensus strings were certified.
"""

import argparse
import collections
import itertools
import time

from pcfgdist.consensus import consensus_string
from pcfgdist.corpus import random_corpus
from pcfgdist.distance import CERTIFIABLE_METRICS, truncated_metric
from pcfgdist.inside import tail_mass


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=24)
    ap.add_argument("--seed", type=int, default=20141)
    ap.add_argument("--max-length", type=int, default=20)
    args = ap.parse_args()

    t0 = time.perf_counter()
    corpus = random_corpus(args.size, seed=args.seed)
    print(f"corpus of {len(corpus)} grammars in {time.perf_counter() - t0:.2f}s")

    lengths = collections.Counter(consensus_string(g).certified_at_length for g in corpus)
    print("consensus certified at length:", dict(sorted(lengths.items())))

    worst = {m: [0.0] * (args.max_length + 1) for m in CERTIFIABLE_METRICS}
    for g1, g2 in itertools.combinations(corpus, 2):
        for m in CERTIFIABLE_METRICS:
            for n in range(args.max_length + 1):
                w = truncated_metric(g1, g2, m, n).interval.width
                worst[m][n] = max(worst[m][n], w)

    names = [m.value for m in CERTIFIABLE_METRICS]
    print(f"{'n':>3} {'max tail':>10} " + " ".join(f"{s:>14}" for s in names))
    for n in range(0, args.max_length + 1, 2):
        tail = max(tail_mass(g, n) for g in corpus)
        row = " ".join(f"{worst[m][n]:>14.3e}" for m in CERTIFIABLE_METRICS)
        print(f"{n:>3} {tail:>10.3e} {row}")
    print(f"total {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
