"""Connect/disconnect process check for every pair of domain axes on a 2x2 lattice."""

import itertools

from cmdb_mbqc.crosscheck import coupling_process


def main():
    print("a_u a_v  connect_min_fidelity  disconnect_product")
    for au, av in itertools.product("xyz", repeat=2):
        checks = coupling_process([[au * 2, av * 2]])
        conn = min(c.fidelity for c in checks if c.mode == "connect")
        prod = all(c.support_disjoint for c in checks if c.mode == "disconnect")
        print(f" {au}   {av}   {conn:.15f}   {prod}")


if __name__ == "__main__":
    main()
