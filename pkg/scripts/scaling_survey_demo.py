#!/usr/bin/env python3
"""Field-vs-coupling scaling survey over random QUBO instances.

Generates a family of gka-style random instances, embeds the small ones on a
synthetic chain target and falls back to the clique-minor size estimate for
the rest, then reports whether the physical field scaling ever exceeds the
coupling scaling (the case where reducing field coefficients would matter).
"""

import argparse
import sys

from annealprep import AcceptRanges, chain_expand, qubo_to_ising, scaling_survey
from annealprep.harness import write_survey_csv
from annealprep.problems import gka_style_random


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 30, 40, 80, 200])
    ap.add_argument("--chain-length", type=int, default=3, dest="chain_length")
    ap.add_argument("--embed-up-to", type=int, default=60, dest="embed_up_to")
    ap.add_argument("--coupling-range", type=float, nargs=2, default=[1.0, 50.0],
                    dest="coupling_range")
    ap.add_argument("--field-range", type=float, nargs=2, default=[-100.0, 100.0],
                    dest="field_range")
    ap.add_argument("--density", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    named = []
    for k, n in enumerate(args.sizes):
        q = gka_style_random(
            n,
            tuple(args.coupling_range),
            tuple(args.field_range),
            density=args.density,
            seed=args.seed + k,
        )
        named.append((f"rand{n}", qubo_to_ising(q)))

    def embedding_for(name, model):
        if model.num_variables <= args.embed_up_to:
            return chain_expand(model, args.chain_length, seed=args.seed)
        return None

    rows = scaling_survey(named, AcceptRanges.dwave_advantage(), embedding_for)
    text = write_survey_csv(rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
