"""Per-phase timing of the single-chain pipeline against chain length."""

import argparse

import numpy as np

from cmdb_mbqc.scenarios import chain_pipeline, trial_rng


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="25,50,100,200,400")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    print(" sites  qubits   povm_s  encode_s  certify_s  tableau_B")
    for n in sizes:
        r = chain_pipeline(n, trial_rng(0, n))
        t = r["times"]
        rows.append((r["n_qubits"], t["povm"]))
        print(f"{n:6d} {r['n_qubits']:7d} {t['povm']:8.3f} {t['encoding']:9.3f} {t['certify']:10.3f} {r['memory_bytes']:10d}")
    q, s = np.log(np.array(rows)).T
    print(f"povm time ~ n^{np.polyfit(q, s, 1)[0]:.2f}")


if __name__ == "__main__":
    main()
