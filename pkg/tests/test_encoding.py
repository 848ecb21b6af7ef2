import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmdb_mbqc.encoding import (
    CertificationError,
    GraphState,
    LogicalRegister,
    build_logical,
    build_logicals,
    certify_cluster,
    derive_chain_stabilizers,
    domains_from_string,
    find_domains,
    find_graph_stabilizers,
    path_graph,
    reduce_domain,
)
from cmdb_mbqc.lattice import LatticeSpec, build
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.povm import plan_from_strings, run_all
from cmdb_mbqc.tableau import gf2_rank

axis_strings = st.text(alphabet="xyz", min_size=1, max_size=6)


def chain(outcomes):
    m, state = build(LatticeSpec(sites_per_chain=len(outcomes)))
    state, rec = run_all(state, m, plan=plan_from_strings(outcomes))
    return m, state, rec


def named(p, names):
    """Pauli as e.g. "-Z2Z2'" using site labels."""
    sign = "-" if p.sign == -1 else ""
    return sign + "".join(f"{p.letters()[q]}{names[q]}" for q in sorted(p.support(), key=lambda q: order(names[q])))


def order(label):
    return ["L", "1", "2", "3", "2'"].index(label)


def site_names(m, index):
    s = m.site(0, index)
    names = {s.qubits[0]: "1", s.qubits[1]: "2", s.qubits[2]: "3", s.dangling_b: "2'"}
    if index == 0:
        names[m.chain_boundary(0)[0]] = "L"
    return names


def test_domains_example():
    assert ["".join(r) for r in domains_from_string("xxyzxzzzy")] == ["xx", "y", "z", "x", "zzz", "y"]
    m, _, rec = chain("xxyzxzzzy")
    doms = find_domains(rec, m)
    assert [(d.start, d.stop, d.axis.value) for d in doms] == [
        (0, 1, "x"), (2, 2, "y"), (3, 3, "z"), (4, 4, "x"), (5, 7, "z"), (8, 8, "y")
    ]


@pytest.mark.parametrize(
    "axis,gens,logical_x",
    [
        ("z", ["Z1Z2", "Z1Z3", "-Z2Z2'"], "X1X2X3X2'"),
        ("x", ["X1X2", "X1X3", "-X2X2'"], "Z1Z2Z3Z2'"),
        ("y", ["Y1Y2", "Y1Y3", "-Y2Y2'"], "Z1Z2Z3Z2'"),
    ],
)
def test_single_site_encoding_table(axis, gens, logical_x):
    other = "x" if axis != "x" else "z"
    m, _, rec = chain(other + axis + other)
    lq = build_logical(find_domains(rec, m)[1], m)
    names = site_names(m, 1)
    assert [named(g, names) for g in lq.stabilizers] == gens
    assert named(lq.logical_x, names) == logical_x
    assert named(lq.logical_z, names) == axis.upper() + "1"


def test_end_site_five_qubit_variant():
    m, _, rec = chain("zx")
    lq = build_logical(find_domains(rec, m)[0], m)
    names = site_names(m, 0)
    assert len(lq.qubits) == 5
    assert sorted(named(g, names) for g in lq.stabilizers) == sorted(["Z1Z2", "Z1Z3", "-ZLZ1", "-Z2Z2'"])
    assert named(lq.logical_x, names) == "XLX1X2X3X2'"


def test_two_site_domain_basis_states():
    m, _, rec = chain("xzzx")
    lq = build_logical(find_domains(rec, m)[1], m)
    assert len(lq.qubits) == 8
    s1, s2 = m.site(0, 1), m.site(0, 2)
    order_ = [*s1.qubits, s1.dangling_b, *s2.qubits, s2.dangling_b]
    for bits in ("00011110", "11100001"):
        value = dict(zip(order_, map(int, bits)))
        for g in lq.stabilizers:
            parity = sum(value[q] for q in g.support())
            assert g.sign * (-1) ** parity == 1
    # and they differ by the logical X
    assert set(lq.logical_x.support().tolist()) == set(order_)


@given(axis_strings)
def test_logical_operators_are_valid(outcomes):
    m, _, rec = chain(outcomes)
    for lq in build_logicals(find_domains(rec, m), m):
        assert not lq.logical_x.commutes(lq.logical_z)
        for g in lq.stabilizers:
            assert g.commutes(lq.logical_x) and g.commutes(lq.logical_z)
        bits = np.array([np.concatenate([g.x, g.z]) for g in lq.stabilizers])
        # exactly one encoded qubit
        assert gf2_rank(bits) == len(lq.stabilizers) == len(lq.qubits) - 1


@pytest.mark.parametrize("outcomes,middle", [("xzx", "-ZXZ"), ("xzy", "-ZYZ")])
def test_cluster_stabilizer_examples(outcomes, middle):
    m, state, rec = chain(outcomes)
    lqs = build_logicals(find_domains(rec, m), m)
    ks = derive_chain_stabilizers(rec, m, lqs, state)
    assert str(ks[1].logical) == middle


@given(axis_strings)
def test_chain_certifies(outcomes):
    m, state, rec = chain(outcomes)
    lqs = build_logicals(find_domains(rec, m), m)
    ks = derive_chain_stabilizers(rec, m, lqs, state)
    graph = certify_cluster(lqs, ks, state)
    assert graph.edges == path_graph(graph.vertices).edges
    for k in ks:
        assert k.form in ("X", "Y")


@given(axis_strings, st.integers(0, 2**16))
def test_reduction_byproducts_flip_signs(outcomes, seed):
    m, state, rec = chain(outcomes)
    lqs = build_logicals(find_domains(rec, m), m)
    before = derive_chain_stabilizers(rec, m, lqs, state)
    reg = LogicalRegister(lqs, m)
    rng = np.random.default_rng(seed)
    flips = []
    for i in range(len(reg)):
        _, new, bp = reduce_domain(state, reg, i, rng)
        assert len(new.kept_sites) == 1 and len(new.qubits) == 3
        flips.append(bp)
    graph = path_graph([lq.domain.label for lq in reg.logicals])
    after = find_graph_stabilizers(state, reg, graph)
    certify_cluster(reg.logicals, after, state, graph)
    for b, a, f in zip(before, after, flips):
        # a Z byproduct on v anticommutes with the X or Y at v
        assert a.form == b.form
        assert a.sign == b.sign * (-1) ** f


def test_register_roundtrip():
    m, state, rec = chain("xyzz")
    reg = LogicalRegister(build_logicals(find_domains(rec, m), m), m)
    for label in ["XZI", "-ZYZ", "IIY"]:
        lp = PauliOperator.from_label(label)
        assert reg.to_logical(reg.to_physical(lp)) == lp


def test_certify_rejects_wrong_graph():
    m, state, rec = chain("xzx")
    lqs = build_logicals(find_domains(rec, m), m)
    ks = derive_chain_stabilizers(rec, m, lqs, state)
    wrong = GraphState([lq.domain.label for lq in lqs], {(0, 1), (1, 2), (0, 2)})
    with pytest.raises(CertificationError):
        certify_cluster(lqs, ks, state, wrong)


def test_graph_state_outputs():
    g = path_graph(["a", "b", "c"])
    assert g.is_bipartite() and g.components() == 1
    assert "n0 -- n1" in g.to_dot()
    assert g.to_dict()["adjacency"]["b"] == ["a", "c"]
    with pytest.raises(ValueError):
        GraphState(["a"], {(0, 0)})
