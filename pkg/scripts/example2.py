"""Second worked example: sign consensus on the 11-agent network.

Uses the null vectors v1 = (2, 1, 1, 1, 2), v3 = (-0.5, -2) with cluster 2 as
the zero cluster, escalates the middle gains until the Schur chain certifies,
and reports the outcome over random initial states.  The canonical
(minimum-norm) null vectors are shown for comparison.

    python scripts/example2.py --draws 100 --out example2_traj.csv
"""
import argparse

import numpy as np

from triconsensus.network import example_network
from triconsensus.signcons import (
    SignConfig, find_signed_nullspace, proof_identities, synthesize_sign,
)
from triconsensus.simulate import classify, integrate, random_initial_conditions

V1 = [2.0, 1, 1, 1, 2]
V3 = [-0.5, -2.0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--draws", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--T", type=float, default=10.0)
    ap.add_argument("--out", help="CSV file for the first trajectory")
    args = ap.parse_args()

    net = example_network(2)
    v1, v3 = find_signed_nullspace(net, (1, 3, 2))
    print(f"minimum-norm null vectors: v1 = {np.round(v1, 6).tolist()}, v3 = {np.round(v3, 6).tolist()}")

    res = synthesize_sign(net, SignConfig(labeling=(1, 3, 2), null_vectors=(V1, V3)))
    if not res.success:
        raise SystemExit("synthesis failed: " + "; ".join(res.reasons))
    g = res.gains
    for p, d in g.cluster_gains(net).items():
        print(f"d{p} = {np.round(d, 6).tolist()}")
    print(f"margin {g.margin:g}, zero cluster {g.zero_cluster}, "
          f"Frobenius eigenvalue of -Phi3 {res.phi3_metzler.frobenius_eig:.2e}")
    print(f"identity residuals: {proof_identities(net, g)}")

    X0 = random_initial_conditions(np.random.default_rng(args.seed), net.size, args.draws)
    kinds = [classify(g.closed_loop, net, x0) for x0 in X0]
    n_sign = sum(v.kind == "sign" for v in kinds)
    pos_first = sum(v.kind == "sign" and v.cluster_signs[0] == 1 for v in kinds)
    print(f"sign consensus in {n_sign}/{args.draws} draws; cluster 1 positive in {pos_first}")
    if args.out:
        integrate(g.closed_loop, X0[0], 1e-3, args.T).write_csv(args.out, stride=10)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
