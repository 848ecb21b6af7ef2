import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmdb_mbqc.coupling import Mode
from cmdb_mbqc.crosscheck import distill_dense, distill_tree
from cmdb_mbqc.distill import PlanError, distill, measure_logical_y, plan_brickwall, plan_from_modes
from cmdb_mbqc.encoding import (
    GraphState,
    LogicalRegister,
    build_logicals,
    certify_cluster,
    find_domains,
    find_graph_stabilizers,
    reduce_domain,
)
from cmdb_mbqc.lattice import LatticeSpec, Layout, build
from cmdb_mbqc.povm import plan_from_strings, run_all


def lattice(strings):
    spec = LatticeSpec(chains=len(strings), sites_per_chain=len(strings[0]), layout=Layout.CMDB_2D)
    m, state = build(spec)
    state, rec = run_all(state, m, plan=plan_from_strings(strings))
    return m, state, rec


def test_minimal_single_brick_plan():
    m, state, rec = lattice(["xzx", "yxy"])
    plan = plan_brickwall(rec, m)
    assert all(mode is Mode.CONNECT for mode in plan.modes.values())
    assert [plan.domains[v].label for v in plan.y_marks] == ["c0[1:1]z", "c1[1:1]x"]
    g = plan.target
    assert len(g.vertices) == 4 and len(g.edges) == 4
    assert all(g.degree(v) == 2 for v in range(4)) and g.is_bipartite()


def test_all_disconnect_gives_paths():
    m, state, rec = lattice(["xzx", "yxy", "zyz"])
    plan = plan_from_modes(rec, m, {})
    assert not plan.y_marks and not plan.z_marks
    assert plan.target.components() == 3
    report = distill(state, rec, m, plan, np.random.default_rng(0))
    assert report.verdict


def test_y_mark_off_degree_two_rejected():
    m, state, rec = lattice(["xzxy", "yxyz", "zyzx"])
    plan = plan_brickwall(rec, m)
    adj = plan.pre_graph()
    plan.y_marks = [next(v for v in adj if len(adj[v]) == 3)]
    with pytest.raises(PlanError):
        plan.validate()


def test_small_lattice_rejected():
    m, state, rec = lattice(["xz", "zx"])
    with pytest.raises(PlanError):
        plan_brickwall(rec, m)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_three_chain_random_trajectories(seed):
    spec = LatticeSpec(chains=3, sites_per_chain=4, layout=Layout.CMDB_2D)
    rng = np.random.default_rng(seed)
    m, state = build(spec)
    state, rec = run_all(state, m, rng)
    plan = plan_brickwall(rec, m)
    report = distill(state, rec, m, plan, rng)
    assert report.verdict, report.reason
    g = report.graph
    assert g.is_bipartite() and max((g.degree(v) for v in range(len(g.vertices))), default=0) <= 3


@pytest.mark.parametrize("outcome", [0, 1])
def test_y_rule_on_a_path(outcome):
    m, state = build(LatticeSpec(sites_per_chain=3))
    state, rec = run_all(state, m, plan=plan_from_strings("xzx"))
    reg = LogicalRegister(build_logicals(find_domains(rec, m), m), m)
    for i in range(3):
        reduce_domain(state, reg, i, np.random.default_rng(i))
    _, out, delta = measure_logical_y(state, reg, 1, [0, 2], forced=outcome, form="X")
    assert out == outcome
    assert delta.to_dict() == ({"0": "Z", "2": "Z"} if outcome else {})
    survivors = LogicalRegister([reg.logicals[0], reg.logicals[2]], m)
    g = GraphState(["u", "w"], {(0, 1)})
    graph = certify_cluster(survivors.logicals, find_graph_stabilizers(state, survivors, g), state, g)
    # the Y rule leaves sqrt(Z)-type corrections on both ends
    assert graph.forms == {0: "Y", 1: "Y"}


def test_logical_y_needs_reduced_encoding():
    m, state = build(LatticeSpec(sites_per_chain=3))
    state, rec = run_all(state, m, plan=plan_from_strings("xzx"))
    reg = LogicalRegister(build_logicals(find_domains(rec, m), m), m)
    with pytest.raises(ValueError):
        measure_logical_y(state, reg, 1, [0, 2], forced=0)


@pytest.mark.parametrize(
    "strings,modes,forced",
    [
        (["xz", "yx"], {0: "connect"}, {}),
        (["xz", "yx"], {0: "connect"}, {"merge0.1": 1, "merge0.2": 1}),
        (["zz", "zz"], {0: "connect"}, {"merge0.1": 0, "merge0.2": 1}),
        (["yx", "xy"], {0: "disconnect"}, {}),
        (["x", "z", "y"], {0: "connect"}, {}),
    ],
)
def test_distillation_against_dense(strings, modes, forced):
    spec = LatticeSpec(chains=len(strings), sites_per_chain=len(strings[0]), layout=Layout.CMDB_2D)
    check = distill_dense(spec, strings, modes, forced)
    assert check.report.verdict
    assert check.fidelity > 1 - 1e-10
    assert check.graph_stabilizers_ok


def test_small_tree_branches_certify_and_sum_to_one():
    # distill_tree flags any record whose branch probabilities miss 1
    spec = LatticeSpec(chains=2, sites_per_chain=3, layout=Layout.CMDB_2D)
    summary = distill_tree(spec, records=[["xzx", "yxy"], ["zyx", "xzy"]])
    assert not summary.failures
    assert summary.branches == 2 * 64


def test_report_json():
    m, state, rec = lattice(["xzx", "yxy"])
    report = distill(state, rec, m, plan_brickwall(rec, m), np.random.default_rng(1))
    data = json.loads(report.to_json())
    assert data["verdict"] is True
    assert len(data["graph"]["vertices"]) == 4
