"""Distilling a brick-wall graph state from the coupled-chain lattice.

Pipeline per trajectory: couple or decouple every merged b pair, shrink every
domain onto one A-site, drop unlinked chain ends with logical Z measurements,
splice out unlinked interior domains with logical Y measurements, then
certify the survivors against the planned graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from cmdb_mbqc.coupling import Mode, PauliFrame, couple, make_choice
from cmdb_mbqc.encoding import (
    CertificationError,
    Domain,
    GraphState,
    LogicalRegister,
    build_logicals,
    certify_cluster,
    find_domains,
    find_graph_stabilizers,
    reduce_domain,
)
from cmdb_mbqc.lattice import SiteMap
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.povm import OutcomeRecord
from cmdb_mbqc.tableau import StabilizerState


class PlanError(ValueError):
    pass


@dataclass
class DistillationPlan:
    domains: list[Domain]
    modes: dict[int, Mode]  # merge id -> mode
    links: dict[int, tuple[int, int]]  # merge id -> (u, v) domain indices
    y_marks: list[int]
    z_marks: list[int]
    target: GraphState  # over survivors, in survivor order
    survivors: list[int]

    def pre_graph(self) -> dict[int, set[int]]:
        return _pre_graph(self.domains, self.modes, self.links)

    def validate(self) -> None:
        adj = self.pre_graph()
        for v in self.y_marks:
            if len(adj[v]) != 2:
                raise PlanError(f"Y-mark on {self.domains[v].label} of degree {len(adj[v])}")
        if set(self.y_marks) & set(self.z_marks):
            raise PlanError("a domain is marked for both Y and Z removal")
        if not self.target.is_bipartite():
            raise PlanError("target graph is not bipartite")
        if any(self.target.degree(v) > 3 for v in range(len(self.target.vertices))):
            raise PlanError("target graph has a vertex of degree > 3")

    def to_dict(self) -> dict:
        return {
            "modes": {str(m): mode.value for m, mode in sorted(self.modes.items())},
            "y_marks": [self.domains[v].label for v in self.y_marks],
            "z_marks": [self.domains[v].label for v in self.z_marks],
            "target": self.target.to_dict(),
        }


def _pre_graph(domains, modes, links) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {i: set() for i in range(len(domains))}
    for i in range(len(domains) - 1):
        if domains[i].chain == domains[i + 1].chain:
            adj[i].add(i + 1)
            adj[i + 1].add(i)
    for m, mode in modes.items():
        if mode is Mode.CONNECT:
            u, v = links[m]
            # CZ twice is the identity: toggle
            if v in adj[u]:
                adj[u].discard(v)
                adj[v].discard(u)
            else:
                adj[u].add(v)
                adj[v].add(u)
    return adj


def _contract(adj: dict[int, set[int]], z_marks, y_marks) -> dict[int, set[int]]:
    """Graph rules: Z deletes a vertex; Y complements its neighbourhood, then deletes it."""
    adj = {v: set(nb) for v, nb in adj.items()}

    def delete(v):
        for u in adj.pop(v):
            adj[u].discard(v)

    for v in z_marks:
        delete(v)
    for v in y_marks:
        nb = sorted(adj[v])
        for i, a in enumerate(nb):
            for b in nb[i + 1 :]:
                if b in adj[a]:
                    adj[a].discard(b)
                    adj[b].discard(a)
                else:
                    adj[a].add(b)
                    adj[b].add(a)
        delete(v)
    return adj


def merge_links(domains: list[Domain], site_map: SiteMap) -> dict[int, tuple[int, int]]:
    """Domain index pair each merge would join."""
    owner: dict[int, int] = {}
    for idx, d in enumerate(domains):
        for q in d.qubits(site_map):
            owner[q] = idx
    return {m: (owner[b1], owner[b2]) for m, (b1, b2) in enumerate(site_map.b_merges)}


def plan_from_modes(
    record: OutcomeRecord, site_map: SiteMap, modes: dict[int, Mode | str]
) -> DistillationPlan:
    """Marks and target graph implied by a connect/disconnect assignment.

    On a chain with at least one vertical link, unlinked domains outside the
    outermost linked ones are Z-removed and unlinked domains between linked
    ones are Y-removed.  Chains without links are kept whole.
    """
    domains = find_domains(record, site_map)
    links = merge_links(domains, site_map)
    modes = {m: Mode(modes.get(m, Mode.DISCONNECT)) for m in range(len(site_map.b_merges))}
    linked = {v for m, mode in modes.items() if mode is Mode.CONNECT for v in links[m]}
    y_marks, z_marks = [], []
    for c in range(site_map.spec.chains):
        idx = [i for i, d in enumerate(domains) if d.chain == c]
        hits = [i for i in idx if i in linked]
        if not hits:
            continue
        for i in idx:
            if i in linked:
                continue
            (y_marks if hits[0] < i < hits[-1] else z_marks).append(i)
    adj = _contract(_pre_graph(domains, modes, links), z_marks, y_marks)
    survivors = sorted(adj)
    pos = {v: k for k, v in enumerate(survivors)}
    edges = {(pos[a], pos[b]) for a in adj for b in adj[a] if a < b}
    target = GraphState([domains[v].label for v in survivors], edges)
    plan = DistillationPlan(domains, modes, links, y_marks, z_marks, target, survivors)
    plan.validate()
    return plan


def plan_brickwall(record: OutcomeRecord, site_map: SiteMap) -> DistillationPlan:
    """Greedy brick-wall plan.

    Merges are visited chain pair by chain pair, left to right.  A merge
    becomes a connecter when neither domain has a vertical link yet and the
    resulting target stays bipartite; everything else disconnects.
    """
    spec = site_map.spec
    if spec.chains < 2 or spec.sites_per_chain < 3:
        raise PlanError("brick-wall distillation needs >= 2 chains of >= 3 sites")
    domains = find_domains(record, site_map)
    links = merge_links(domains, site_map)
    order = sorted(
        links,
        key=lambda m: (domains[links[m][0]].chain, site_map.b_particle(site_map.b_merges[m][0]).site or 0),
    )
    modes: dict[int, Mode] = {}
    used: set[int] = set()
    for m in order:
        u, v = links[m]
        if u in used or v in used:
            continue
        trial = dict(modes)
        trial[m] = Mode.CONNECT
        try:
            plan_from_modes(record, site_map, trial)
        except PlanError:
            continue
        modes = trial
        used |= {u, v}
    return plan_from_modes(record, site_map, modes)


# -- execution --------------------------------------------------------------------


@dataclass
class DistillationReport:
    graph: GraphState
    verdict: bool
    steps: list[dict] = field(default_factory=list)
    probability: Fraction = Fraction(1)
    frame: PauliFrame = field(default_factory=PauliFrame)
    random_steps: list[str] = field(default_factory=list)
    reason: str = ""
    survivors: LogicalRegister | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "graph": self.graph.to_dict(),
            "steps": self.steps,
            "probability": [self.probability.numerator, self.probability.denominator],
            "frame": self.frame.to_dict(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def forced_plan(self) -> dict[str, int]:
        """Outcomes of every keyed step, in the form ``distill(forced=...)`` takes."""
        out = {}
        for s in self.steps:
            if s["step"] in ("connect", "disconnect"):
                out[f"merge{s['merge']}.1"], out[f"merge{s['merge']}.2"] = s["m1"], s["m2"]
            elif "key" in s:
                out[s["key"]] = s["outcome"]
        return out


def _measure(state, op, key, forced, rng, report: DistillationReport) -> int:
    if state.expectation(op) == 0:
        report.random_steps.append(key)
    res = state.measure(op, forced.get(key), rng)
    report.probability *= res.probability
    return res.outcome


def vertex_form(
    state: StabilizerState, register: LogicalRegister, v: int, neighbors: list[int]
) -> str:
    """'X' or 'Y': which of +/- L_v prod Z_nb currently stabilizes the state."""
    d = len(register)
    ops = {u: "Z" for u in neighbors}
    for form in ("X", "Y"):
        lp = PauliOperator.from_sparse(d, {**ops, v: form})
        if state.expectation(register.to_physical(lp)) != 0:
            return form
    raise CertificationError(f"vertex {register.logicals[v].domain.label} is not in graph form")


def measure_logical_y(
    state: StabilizerState,
    register: LogicalRegister,
    idx: int,
    neighbors: list[int],
    rng: np.random.Generator | None = None,
    forced: int | None = None,
    form: str = "X",
) -> tuple[StabilizerState, int, PauliFrame]:
    """Graph-state Y measurement on a reduced logical.

    ``form`` is the Pauli the vertex's own stabilizer carries there.  For an
    X-form vertex this is the encoded Y; a Y-form vertex is an S-rotation
    away from the graph state, so its graph-frame Y is the encoded X.
    Outcome 1 leaves Z on the neighbours.
    """
    lq = register.logicals[idx]
    sm = register.site_map
    if len(lq.kept_sites) != 1 or (sm is not None and any(sm.is_b(q) for q in lq.qubits)):
        raise ValueError(f"{lq.domain.label} must be reduced before measuring its logical Y")
    op = {"X": lq.logical_y, "Y": lq.logical_x}[form]
    res = state.measure(op, forced, rng)
    delta = PauliFrame()
    for u in neighbors:
        delta.apply_z(u, res.outcome)
    return state, res.outcome, delta


def distill(
    state: StabilizerState,
    record: OutcomeRecord,
    site_map: SiteMap,
    plan: DistillationPlan,
    rng: np.random.Generator | None = None,
    forced: dict[str, int] | None = None,
) -> DistillationReport:
    """Run couplings, reductions and Z/Y removals, then certify against the plan.

    ``forced`` pins outcomes by step key ("merge<m>.1", "merge<m>.2",
    "z<v>", "y<v>"); reduction outcomes always come from ``rng``.
    """
    forced = forced or {}
    if find_domains(record, site_map) != plan.domains:
        raise PlanError("plan was made for a different outcome record")
    register = LogicalRegister(build_logicals(plan.domains, site_map), site_map)
    report = DistillationReport(graph=plan.target, verdict=False)
    frame = report.frame
    adj = plan.pre_graph()

    for m in sorted(plan.modes):
        mode = plan.modes[m]
        choice = make_choice(register, m, mode)
        keys = (f"merge{m}.1", f"merge{m}.2")
        pin = None
        if keys[0] in forced or keys[1] in forced:
            pin = (forced.get(keys[0], 0), forced.get(keys[1], 0))
        out = couple(state, register, choice, rng, pin)
        for key, p in zip(keys, out.probabilities):
            if p != 1:
                report.random_steps.append(key)
            report.probability *= p
        u, v, m1, m2 = out.u, out.v, out.m1, out.m2
        if mode is Mode.CONNECT:
            frame.through_cz(u, v)
        frame.merge(out.delta)
        report.steps.append({"step": mode.value, "merge": m, "u": u, "v": v, "m1": m1, "m2": m2})

    for i in range(len(register)):
        _, _, bp = reduce_domain(state, register, i, rng)
        frame.apply_z(i, bp)
        report.steps.append({"step": "reduce", "domain": plan.domains[i].label, "byproduct": bp})

    for v in plan.z_marks:
        out = _measure(state, register.logicals[v].logical_z, f"z{v}", forced, rng, report)
        for u in adj[v]:
            frame.apply_z(u, out)
        for u in adj.pop(v):
            adj[u].discard(v)
        report.steps.append({"step": "logical_z", "key": f"z{v}", "domain": plan.domains[v].label, "outcome": out})

    for v in plan.y_marks:
        nb = sorted(adj[v])
        if len(nb) != 2:
            raise PlanError(f"Y-mark on {plan.domains[v].label} has degree {len(nb)} at measurement")
        key = f"y{v}"
        form = vertex_form(state, register, v, nb)
        lq = register.logicals[v]
        if state.expectation(lq.logical_y if form == "X" else lq.logical_x) == 0:
            report.random_steps.append(key)
        _, out, delta = measure_logical_y(state, register, v, nb, rng, forced.get(key), form)
        report.probability *= Fraction(1, 2) if key in report.random_steps else Fraction(1)
        frame.merge(delta)
        a, b = nb
        if b in adj[a]:
            adj[a].discard(b)
            adj[b].discard(a)
        else:
            adj[a].add(b)
            adj[b].add(a)
        for u in adj.pop(v):
            adj[u].discard(v)
        report.steps.append(
            {"step": "logical_y", "key": key, "domain": plan.domains[v].label, "form": form, "outcome": out}
        )

    survivors = LogicalRegister([register.logicals[v] for v in plan.survivors], site_map)
    try:
        stabs = find_graph_stabilizers(state, survivors, plan.target)
        report.graph = certify_cluster(survivors.logicals, stabs, state, plan.target)
        report.verdict = True
    except CertificationError as exc:
        report.reason = str(exc)
    report.survivors = survivors
    return report
