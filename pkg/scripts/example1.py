"""First worked example: tripartite consensus on the 11-agent network.

Builds the gains for kernel ratios (v2, v3) = (5, -8), certifies the closed
loop, simulates a batch of random initial states and writes one trajectory
as CSV for plotting.

    python scripts/example1.py --draws 100 --out example1_traj.csv
"""
import argparse

import numpy as np

from triconsensus.network import example_network
from triconsensus.simulate import (
    analytic_limit, classify, convergence_time, integrate, random_initial_conditions,
)
from triconsensus.tripartite import (
    check_inequality_constraints, gains_from_ratios, synthesize_tripartite,
    verify_structured_kernel,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--draws", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--T", type=float, default=5.0)
    ap.add_argument("--out", help="CSV file for the first trajectory")
    args = ap.parse_args()

    net = example_network(1)
    g = gains_from_ratios(net, (1, 3, 2), 5, -8)
    for p, d in g.cluster_gains(net).items():
        print(f"d{p} = {np.round(d, 6).tolist()}")
    cert = verify_structured_kernel(net, g)
    cons = check_inequality_constraints(net, g)
    print(f"certified: {cert.success}  reduced rank {cert.reduced_rank}  "
          f"spectral gap {cert.certificate.min_nonzero:.4f}")
    print(f"sufficient chain: {cons.detail}")

    searched = synthesize_tripartite(net)
    print(f"grid search picks labeling {tuple(searched.gains.labeling)} with v = {searched.gains.v}")

    rng = np.random.default_rng(args.seed)
    X0 = random_initial_conditions(rng, net.size, args.draws)
    traj = integrate(g.closed_loop, X0, 1e-3, args.T)
    lims = analytic_limit(g.closed_loop, X0)
    print(f"max |x(T) - x_inf| over {args.draws} draws: {np.abs(traj.states[-1] - lims).max():.3g}")
    times = [convergence_time(g.closed_loop, x0, 0.05) for x0 in X0]
    print(f"5% convergence time: median {np.median(times):.3f}, max {np.max(times):.3f}")
    v = classify(g.closed_loop, net, X0[0])
    print(f"first draw: {v.kind}, cluster values {np.round(v.cluster_values, 4).tolist()}, "
          f"ratios {np.round(v.ratios(), 6).tolist()}")
    if args.out:
        integrate(g.closed_loop, X0[0], 1e-3, args.T).write_csv(args.out, stride=10)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
