import json

import numpy as np
import pytest

from cmdb_mbqc.lattice import (
    LatticeSpec,
    Layout,
    SiteMap,
    build,
    build_map,
    hamiltonian_terms,
)
from cmdb_mbqc.pauli import PauliOperator


def test_single_chain_counts():
    m = build_map(LatticeSpec(sites_per_chain=4))
    assert m.n_qubits == 4 * 4 + 2
    assert len(m.a_sites) == 4
    assert len(m.edges) == 2 * 4 + 1
    assert not m.b_merges


def test_every_qubit_in_exactly_one_singlet():
    m = build_map(LatticeSpec(chains=3, sites_per_chain=5, layout=Layout.CMDB_2D))
    seen = [q for e in m.edges for q in e]
    assert sorted(seen) == list(range(m.n_qubits))


def test_2d_merges_pair_up_and_down():
    m = build_map(LatticeSpec(chains=3, sites_per_chain=4, layout=Layout.CMDB_2D))
    for b1, b2 in m.b_merges:
        p1, p2 = m.b_particle(b1), m.b_particle(b2)
        assert p2.chain == p1.chain + 1
        assert (p1.direction, p2.direction) == ("up", "down")
        assert m.site(p1.chain, p1.site).column == m.site(p2.chain, p2.site).column
    merged = {q for pair in m.b_merges for q in pair}
    assert merged.isdisjoint(m.boundary_b)


def test_spec_validation():
    with pytest.raises(ValueError):
        LatticeSpec(chains=2, layout=Layout.SINGLE_CHAIN)
    with pytest.raises(ValueError):
        LatticeSpec(chains=1, layout=Layout.CMDB_2D)
    with pytest.raises(ValueError):
        LatticeSpec(chains=2, sites_per_chain=2, layout=Layout.CMDB_2D, stagger=(0,))


def test_sitemap_json_roundtrip():
    m = build_map(LatticeSpec(chains=2, sites_per_chain=3, layout=Layout.CMDB_2D))
    again = SiteMap.from_json(m.to_json())
    assert again.to_dict() == m.to_dict()
    assert json.loads(m.to_json())["version"] >= 1


def test_singlet_state_stabilizers():
    m, st = build(LatticeSpec(sites_per_chain=3))
    assert st.is_pure
    for i, j in m.edges:
        for letter in "XYZ":
            # the singlet has <sigma sigma> = -1 on every axis
            assert st.expectation(PauliOperator.from_sparse(m.n_qubits, {i: letter, j: letter})) == -1


def test_hamiltonian_terms_cover_bonds():
    spec = LatticeSpec(sites_per_chain=3)
    terms = hamiltonian_terms(spec)
    kinds = sorted(t.total_spin for t in terms)
    # two A-A bonds (S=3), three A-b dangling (S=2), two boundary terms
    assert kinds.count(3) == 2
    assert len(terms) == 2 + 3 + 2


def test_chain_submap_offsets():
    m = build_map(LatticeSpec(chains=2, sites_per_chain=3, layout=Layout.CMDB_2D))
    sub, offset = m.chain_submap(1)
    assert offset == m.chain_qubits(1).start
    assert sub.n_qubits == len(m.chain_qubits(1))
