"""Empirical axis correlations along a chain: P(same axis at distance r).

Independent sites would give 1/3 at every distance; no reference values are
assumed here, the table is just printed (and written as JSON with --out).
"""

import argparse
import json

import numpy as np

from cmdb_mbqc.lattice import LatticeSpec, build
from cmdb_mbqc.povm import run_all
from cmdb_mbqc.scenarios import trial_rng


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sites", type=int, default=12)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()
    same = np.zeros(args.sites)
    pairs = np.zeros(args.sites)
    for t in range(args.trials):
        m, state = build(LatticeSpec(sites_per_chain=args.sites))
        _, rec = run_all(state, m, trial_rng(args.seed, t))
        s = rec.chain_string(0)
        for r in range(1, args.sites):
            same[r] += sum(a == b for a, b in zip(s, s[r:]))
            pairs[r] += args.sites - r
    rows = {r: same[r] / pairs[r] for r in range(1, args.sites)}
    for r, f in rows.items():
        err = np.sqrt(f * (1 - f) / pairs[r])
        print(f"r={r:2d}  P(same)={f:.4f} +/- {err:.4f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"sites": args.sites, "trials": args.trials, "p_same": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
