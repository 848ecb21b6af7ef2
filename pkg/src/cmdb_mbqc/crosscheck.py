"""Tableau-versus-dense comparisons shared by the tests, the acceptance run and the CLI."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from cmdb_mbqc import dense
from cmdb_mbqc.coupling import Mode, couple, make_choice
from cmdb_mbqc.distill import DistillationReport, distill, plan_from_modes
from cmdb_mbqc.encoding import LogicalRegister, build_logicals, find_domains
from cmdb_mbqc.lattice import LatticeSpec, Layout, SiteMap, build
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.povm import AXES, plan_from_strings, run_all


@dataclass
class BranchCheck:
    axes: str
    tableau_probability: Fraction
    dense_probability: float
    fidelity: float

    @property
    def probability_error(self) -> float:
        return abs(float(self.tableau_probability) - self.dense_probability)


def povm_branches(spec: LatticeSpec, cap: int = dense.DEFAULT_CAP) -> list[BranchCheck]:
    """Every POVM outcome string on a lattice: exact tableau vs dense branch weights."""
    site_map, _ = build(spec)
    psi0 = dense.build_aklt(site_map, cap)
    n_sites = len(site_map.a_sites)
    out = []
    for combo in itertools.product([a.value for a in AXES], repeat=n_sites):
        plan = dict(zip(site_map.site_order(), combo))
        _, state = build(spec, record_history=True)
        state, record = run_all(state, site_map, plan=plan)
        psi, probs = dense.replay(state.history, psi0)
        out.append(
            BranchCheck(
                "".join(combo),
                record.total_probability,
                float(np.prod(probs)),
                dense.fidelity(psi, dense.tableau_to_dense(state, cap)),
            )
        )
    return out


# -- two-chain entangling gate -----------------------------------------------------

_P1 = {letter: PauliOperator.from_label(letter).to_matrix() for letter in "IXYZ"}
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def logical_density(psi: dense.DenseState, register: LogicalRegister, u: int, v: int) -> np.ndarray:
    """Two-qubit density matrix of logicals (u, v) by Pauli tomography on the dense state."""
    d = len(register)
    rho = np.zeros((4, 4), complex)
    for a, b in itertools.product("IXYZ", repeat=2):
        lp = PauliOperator.from_sparse(d, {u: a, v: b})
        rho += psi.expectation(register.to_physical(lp)).real * np.kron(_P1[a], _P1[b])
    return rho / 4


@dataclass
class GateCheck:
    plan: tuple[str, ...]
    mode: str
    prep: str
    branch: tuple[int, int]
    fidelity: float
    support_disjoint: bool | None = None


def coupling_process(
    plans: list[list[str]],
    modes: tuple[str, ...] = ("connect", "disconnect"),
    preps: tuple[str, ...] = ("00", "01", "10", "11", "++"),
) -> list[GateCheck]:
    """Logical action of a merge on two 2-site chains, against the ideal gate.

    Each chain is forced to one domain so the two logicals start in a product
    state; "++" keeps the post-POVM logical X eigenstates and the basis-state
    preparations measure the logical Zs with forced outcomes.  The expected
    output is Z^m1 Z^m2 CZ rho CZ Z^m1 Z^m2 for connect and without CZ for
    disconnect.
    """
    spec = LatticeSpec(chains=2, sites_per_chain=2, layout=Layout.CMDB_2D)
    out = []
    for plan, prep in itertools.product(plans, preps):
        site_map, state = build(spec, record_history=True)
        state, record = run_all(state, site_map, plan=plan_from_strings(plan))
        register = LogicalRegister(build_logicals(find_domains(record, site_map), site_map), site_map)
        b1, b2 = site_map.b_merges[0]
        u, v = register.owner[b1], register.owner[b2]
        if prep != "++":
            for q, bit in ((u, prep[0]), (v, prep[1])):
                state.measure(register.logicals[q].logical_z, int(bit))
        psi0 = dense.singlet_product(site_map)
        psi_in, _ = dense.replay(state.history, psi0)
        rho_in = logical_density(psi_in, register, u, v)
        for mode, branch in itertools.product(modes, itertools.product((0, 1), repeat=2)):
            st = state.copy()
            st.history = list(state.history)
            reg = LogicalRegister(list(register.logicals), site_map)
            couple(st, reg, make_choice(reg, 0, mode), forced=branch)
            psi_out, _ = dense.replay(st.history[len(state.history) :], psi_in)
            rho_out = logical_density(psi_out, reg, u, v)
            zm = np.kron(np.linalg.matrix_power(_P1["Z"], branch[0]), np.linalg.matrix_power(_P1["Z"], branch[1]))
            ideal = zm @ _CZ if Mode(mode) is Mode.CONNECT else zm
            expected = ideal @ rho_in @ ideal.conj().T
            fid = float(np.trace(expected @ rho_out).real)
            disjoint = None
            if Mode(mode) is Mode.DISCONNECT:
                disjoint = is_product(rho_out)
            out.append(GateCheck(tuple(plan), mode, prep, branch, fid, disjoint))
    return out


def is_product(rho: np.ndarray, tol: float = 1e-9) -> bool:
    """rho equals the tensor product of its two one-qubit marginals."""
    r = rho.reshape(2, 2, 2, 2)
    ru = np.einsum("ajbj->ab", r)
    rv = np.einsum("iaib->ab", r)
    return bool(np.allclose(rho, np.kron(ru, rv), atol=tol))


# -- distillation ----------------------------------------------------------------------


@dataclass
class DistillCheck:
    report: DistillationReport
    fidelity: float
    graph_stabilizers_ok: bool


def distill_dense(
    spec: LatticeSpec,
    strings: list[str],
    modes: dict[int, str],
    forced: dict[str, int] | None = None,
    seed: int = 0,
    cap: int = dense.DEFAULT_CAP,
) -> DistillCheck:
    """Run one forced distillation branch and compare it with the dense replay."""
    site_map, state = build(spec, record_history=True)
    state, record = run_all(state, site_map, plan=plan_from_strings(strings))
    plan = plan_from_modes(record, site_map, modes)
    report = distill(state, record, site_map, plan, np.random.default_rng(seed), forced)
    psi, _ = dense.replay(state.history, dense.build_aklt(site_map, cap))
    fid = dense.fidelity(psi, dense.tableau_to_dense(state, cap))
    ok = report.verdict and _graph_on_dense(psi, report, site_map)
    return DistillCheck(report, fid, ok)


def _graph_on_dense(psi: dense.DenseState, report: DistillationReport, site_map: SiteMap) -> bool:
    """Each corrected graph stabilizer has expectation +1 on the dense state."""
    reg = report.survivors
    g = report.graph
    for v in range(len(g.vertices)):
        lp = g.stabilizer(v)
        if g.forms.get(v) == "Y":
            lp.z[v] = 1
            lp = lp.times_phase(1)
        lp = lp.times_phase(0 if g.signs.get(v, 1) == 1 else 2)
        if abs(psi.expectation(reg.to_physical(lp)) - 1) > 1e-9:
            return False
    return True


@dataclass
class TreeSummary:
    records: int = 0
    branches: int = 0
    failures: list[tuple[str, dict]] = None
    total_probability: Fraction = Fraction(0)

    def __post_init__(self):
        self.failures = [] if self.failures is None else self.failures


def distill_tree(
    spec: LatticeSpec,
    planner=None,
    seed: int = 0,
    records: list[list[str]] | None = None,
) -> TreeSummary:
    """Distill every branch of the outcome tree.

    The tree branches over every POVM outcome string (or the given
    ``records``) and then over every random coupling, Z-removal and Y outcome.
    Reduction outcomes are drawn from ``seed``; they only move byproducts.
    """
    from cmdb_mbqc.distill import PlanError, plan_brickwall

    planner = planner or plan_brickwall
    site_map, _ = build(spec)
    n_sites = len(site_map.a_sites)
    n, per = spec.chains, spec.sites_per_chain
    if records is None:
        combos = itertools.product([a.value for a in AXES], repeat=n_sites)
        records = [["".join(c[i * per : (i + 1) * per]) for i in range(n)] for c in combos]
    summary = TreeSummary()
    for strings in records:
        _, base = build(spec)
        base, record = run_all(base, site_map, plan=plan_from_strings(strings))
        summary.records += 1
        try:
            plan = planner(record, site_map)
        except PlanError as exc:
            summary.failures.append((",".join(strings), {"plan": str(exc)}))
            continue
        probe = distill(base.copy(), record, site_map, plan, np.random.default_rng(seed))
        keys = probe.random_steps
        sub_total = Fraction(0)
        for bits in itertools.product((0, 1), repeat=len(keys)):
            forced = dict(zip(keys, bits))
            rep = distill(base.copy(), record, site_map, plan, np.random.default_rng(seed), forced)
            summary.branches += 1
            sub_total += rep.probability
            if not rep.verdict or rep.random_steps != keys:
                summary.failures.append((",".join(strings), forced))
        if sub_total != 1:
            summary.failures.append((",".join(strings), {"branch_total": str(sub_total)}))
        summary.total_probability += record.total_probability * sub_total
    return summary
