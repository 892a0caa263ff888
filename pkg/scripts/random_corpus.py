"""Success rates of both synthesis routes on random clustering-balanced networks.

    python scripts/random_corpus.py --count 200 --max-size 4 --seed 1
"""
import argparse
import collections
import time

import numpy as np

from triconsensus.network import random_network, validate
from triconsensus.signcons import synthesize_sign
from triconsensus.tripartite import synthesize_tripartite


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--max-size", type=int, default=4)
    ap.add_argument("--p-intra", type=float, default=0.7)
    ap.add_argument("--p-inter", type=float, default=0.6)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    tally = collections.Counter()
    margins, ratios = [], []
    t0 = time.perf_counter()
    for _ in range(args.count):
        sizes = tuple(int(s) for s in rng.integers(1, args.max_size + 1, 3))
        net = random_network(rng, sizes, args.p_intra, args.p_inter)
        rep = validate(net)
        tally["tripartite-admissible"] += bool(rep.admissible_tripartite)
        tally["sign-admissible"] += bool(rep.admissible_sign)
        tri = synthesize_tripartite(net)
        sign = synthesize_sign(net)
        tally["tripartite success"] += tri.success
        tally["sign success"] += sign.success
        if tri.success:
            ratios.append(max(abs(tri.gains.v[1]), abs(tri.gains.v[2])))
        if sign.success:
            margins.append(sign.gains.margin)
    elapsed = time.perf_counter() - t0
    for k in ("tripartite-admissible", "tripartite success", "sign-admissible", "sign success"):
        print(f"{k:>22}: {tally[k]}/{args.count}")
    if ratios:
        print(f"largest |v| used: median {np.median(ratios):g}, max {max(ratios):g}")
    if margins:
        print(f"sign margin: median {np.median(margins):g}, max {max(margins):g}")
    print(f"{elapsed:.1f} s")


if __name__ == "__main__":
    main()
