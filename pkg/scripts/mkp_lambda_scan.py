#!/usr/bin/env python3
"""Penalty and slack-bound tuning scan for a knapsack instance.

Two tables: (1) the logical coupling scale s_J of the penalty QUBO as the
slack coefficient bound shrinks, which bottoms out at the weight-product
floor max_{j,j'} sum_i w_ij w_ij'; (2) feasibility and best objective under
simulated annealing while the penalty coefficient decreases geometrically
from a start value, the probe used to pick the working penalty.
"""

import argparse
import sys

from annealprep import AcceptRanges, qubo_to_ising, scaling_factors
from annealprep.harness import MetricOptions, compute_metrics, make_sampler
from annealprep.problems import max_weight_product, mkp_checker, mkp_parse, mkp_to_qubo


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instance", required=True, help="knapsack file")
    ap.add_argument("--mus", type=int, nargs="+", default=[512, 256, 160, 128, 64])
    ap.add_argument("--lambda-start", type=float, default=10.0, dest="lambda_start")
    ap.add_argument("--lambda-decay", type=float, default=3.0, dest="lambda_decay")
    ap.add_argument("--lambda-steps", type=int, default=8, dest="lambda_steps")
    ap.add_argument("--reads", type=int, default=200)
    ap.add_argument("--sweeps", type=int, default=400)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    with open(args.instance) as fh:
        inst = mkp_parse(fh.read())
    ranges = AcceptRanges.dwave_advantage()
    lines = [f"# weight-product floor: {max_weight_product(inst)}"]

    lines.append("table,mu,lambda,s_j,feasibility_rate,best_objective")
    for mu in args.mus:
        mu_eff = min(mu, max(inst.capacities))
        qubo, _, _ = mkp_to_qubo(inst, lam=1.0, mu=mu_eff)
        s_j = scaling_factors(qubo_to_ising(qubo), ranges).s_j
        lines.append(f"coupling_scale,{mu_eff},1.0,{s_j!r},,")

    sampler = make_sampler({"kind": "sa", "sweeps": args.sweeps, "seed": args.seed}, args.reads)
    checker = mkp_checker(inst)
    lam = args.lambda_start
    for step in range(args.lambda_steps):
        qubo, _, _ = mkp_to_qubo(inst, lam=lam, mu=max(inst.capacities))
        samples = sampler(qubo_to_ising(qubo), (step,))
        row = compute_metrics(samples, MetricOptions(), checker=checker)
        best = "" if row.best_objective is None else repr(row.best_objective)
        lines.append(f"lambda_scan,{max(inst.capacities)},{lam!r},,{row.feasibility_rate!r},{best}")
        if row.feasibility_rate == 0.0:
            break
        lam /= args.lambda_decay
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
