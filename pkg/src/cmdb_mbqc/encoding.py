"""Domains, logical-qubit encodings and cluster-state certification.

A domain is a maximal run of A-sites on one chain with the same POVM axis
``a``.  Its qubits are the virtual qubits of those sites, their dangling
spin-1/2s, and the boundary spin-1/2 when the run touches a chain end; every
qubit of a chain belongs to exactly one domain.  The code space is fixed by

* ``sigma_a(v1) sigma_a(v2)`` and ``sigma_a(v1) sigma_a(v3)`` on each site,
* ``-sigma_a sigma_a`` on every singlet edge inside the domain,

the logical Z is ``sigma_a`` on the first leg of the first site and the
logical X is the basis flip (``sigma_x`` for z, ``sigma_z`` for x and y) on
every domain qubit.
"""

from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from cmdb_mbqc.lattice import SiteMap
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.povm import FLIP, SIGMA, OutcomeRecord, PovmAxis
from cmdb_mbqc.tableau import StabilizerState, apply_clifford, canonical_form, gf2_rank, gf2_solve


class CertificationError(RuntimeError):
    """A constructed stabilizer is missing from the state: an implementation bug."""


@dataclass(frozen=True)
class Domain:
    chain: int
    start: int  # first site index (inclusive)
    stop: int  # last site index (inclusive)
    axis: PovmAxis

    @property
    def sites(self) -> range:
        return range(self.start, self.stop + 1)

    @property
    def size(self) -> int:
        return self.stop - self.start + 1

    def qubits(self, site_map: SiteMap) -> list[int]:
        out = []
        n_sites = site_map.spec.sites_per_chain
        left_b, right_b = site_map.chain_boundary(self.chain)
        if self.start == 0:
            out.append(left_b)
        for i in self.sites:
            s = site_map.site(self.chain, i)
            out += [*s.qubits, s.dangling_b]
        if self.stop == n_sites - 1:
            out.append(right_b)
        return out

    @property
    def label(self) -> str:
        return f"c{self.chain}[{self.start}:{self.stop}]{self.axis.value}"


def find_domains(record: OutcomeRecord, site_map: SiteMap) -> list[Domain]:
    """Maximal same-axis runs, chain-major and left to right."""
    domains = []
    for c in range(site_map.spec.chains):
        n_sites = site_map.spec.sites_per_chain
        start = 0
        for i in range(1, n_sites + 1):
            if i == n_sites or record.axes[(c, i)] != record.axes[(c, start)]:
                domains.append(Domain(c, start, i - 1, record.axes[(c, start)]))
                start = i
    return domains


def domains_from_string(outcomes: str) -> list[list[str]]:
    """Split ``"xxyzxzzzy"`` into runs (a convenience for docs and tests)."""
    runs: list[list[str]] = []
    for ch in outcomes:
        if runs and runs[-1][-1] == ch:
            runs[-1].append(ch)
        else:
            runs.append([ch])
    return runs


# -- logical qubits -----------------------------------------------------------


@dataclass
class LogicalQubit:
    domain: Domain
    qubits: tuple[int, ...]
    stabilizers: list[PauliOperator]
    logical_x: PauliOperator
    logical_z: PauliOperator
    removed: frozenset[int] = frozenset()
    kept_sites: tuple[int, ...] = ()

    @property
    def axis(self) -> PovmAxis:
        return self.domain.axis

    @property
    def logical_y(self) -> PauliOperator:
        # Y = i X Z
        return (self.logical_x * self.logical_z).times_phase(1)

    def operator(self, letter: str) -> PauliOperator:
        n = self.logical_x.n
        return {
            "I": PauliOperator.identity(n),
            "X": self.logical_x,
            "Z": self.logical_z,
            "Y": self.logical_y,
        }[letter]

    def decompose(self, p: PauliOperator) -> tuple[int, int, int]:
        """Write p (supported on this encoding) as i^k X^a Z^b g with g in the code group.

        Returns (k, a, b).  Raises if p does not preserve the code space.
        """
        a = 0 if p.commutes(self.logical_z) else 1
        b = 0 if p.commutes(self.logical_x) else 1
        for g in self.stabilizers:
            if not p.commutes(g):
                raise ValueError(f"{p.sparse_label()} does not preserve the code space")
        lop = PauliOperator.identity(p.n)
        if a:
            lop = lop * self.logical_x
        if b:
            lop = lop * self.logical_z
        rest = lop.inverse() * p
        g = _group_element(self.stabilizers, rest)
        if g is None:
            raise ValueError(f"{p.sparse_label()} is not a logical Pauli of {self.domain.label}")
        # rest = i^(rest.k - g.k) g on bits; p = lop * rest
        return (rest.k - g.k) % 4, a, b

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.label,
            "qubits": list(self.qubits),
            "stabilizers": [g.sparse_label() for g in self.stabilizers],
            "logical_x": self.logical_x.sparse_label(),
            "logical_z": self.logical_z.sparse_label(),
        }


def _group_element(gens: list[PauliOperator], p: PauliOperator) -> PauliOperator | None:
    """The group element with the same bits as p (signed), or None."""
    if not gens:
        return PauliOperator.identity(p.n) if p.weight() == 0 else None
    support = sorted(set(np.concatenate([g.support() for g in gens] + [p.support()]).tolist()))
    cols = np.array(support, dtype=np.int64)
    mat = np.array([np.concatenate([g.x[cols], g.z[cols]]) for g in gens], dtype=np.uint8)
    target = np.concatenate([p.x[cols], p.z[cols]])
    sol = gf2_solve(mat.T, target)
    if sol is None:
        return None
    acc = PauliOperator.identity(p.n)
    for i in np.flatnonzero(sol):
        acc = acc * gens[i]
    return acc


def _subgroup_avoiding(gens: list[PauliOperator], avoid: list[int]) -> list[PauliOperator]:
    """Generators of the subgroup of <gens> with no support on ``avoid``."""
    pool = [g.copy() for g in gens]
    for q in avoid:
        for part in ("x", "z"):
            piv = next((i for i, g in enumerate(pool) if getattr(g, part)[q]), None)
            if piv is None:
                continue
            pivot = pool.pop(piv)
            pool = [g * pivot if getattr(g, part)[q] else g for g in pool]
    return pool


def _domain_edges(domain: Domain, site_map: SiteMap, qubit_set: set[int]) -> list[tuple[int, int]]:
    return [(i, j) for i, j in site_map.edges if i in qubit_set and j in qubit_set]


def build_logical(
    domain: Domain, site_map: SiteMap, removed: frozenset[int] | set[int] = frozenset()
) -> LogicalQubit:
    """Encoding of the domain's qubit, optionally after measuring out ``removed`` qubits."""
    n = site_map.n_qubits
    a = domain.axis
    s, f = SIGMA[a], FLIP[a]
    all_q = domain.qubits(site_map)
    qset = set(all_q)
    removed = frozenset(removed) & qset
    gens: list[PauliOperator] = []
    for i in domain.sites:
        v1, v2, v3 = site_map.site(domain.chain, i).qubits
        gens.append(PauliOperator.from_sparse(n, {v1: s, v2: s}))
        gens.append(PauliOperator.from_sparse(n, {v1: s, v3: s}))
    for i, j in _domain_edges(domain, site_map, qset):
        gens.append(PauliOperator.from_sparse(n, {i: s, j: s}, sign=-1))
    if removed:
        gens = _subgroup_avoiding(gens, sorted(removed))
    kept = tuple(
        i for i in domain.sites if not set(site_map.site(domain.chain, i).qubits) & removed
    )
    if not kept:
        raise ValueError(f"no A-site left to carry the qubit of {domain.label}")
    remaining = [q for q in all_q if q not in removed]
    z_rep = PauliOperator.from_sparse(n, {site_map.site(domain.chain, kept[0]).qubits[0]: s})
    x_rep = PauliOperator.from_sparse(n, {q: f for q in remaining})
    return LogicalQubit(domain, tuple(remaining), gens, x_rep, z_rep, removed, kept)


def build_logicals(domains: list[Domain], site_map: SiteMap) -> list[LogicalQubit]:
    return [build_logical(d, site_map) for d in domains]


class LogicalRegister:
    """Maps physical Paulis to and from Paulis on the register of logical qubits."""

    def __init__(self, logicals: list[LogicalQubit], site_map: SiteMap | None = None):
        self.logicals = list(logicals)
        self.site_map = site_map
        self.owner: dict[int, int] = {}
        for idx, lq in enumerate(self.logicals):
            for q in lq.qubits:
                self.owner[q] = idx

    def __len__(self) -> int:
        return len(self.logicals)

    def replace(self, idx: int, lq: LogicalQubit) -> None:
        for q in self.logicals[idx].qubits:
            self.owner.pop(q, None)
        self.logicals[idx] = lq
        for q in lq.qubits:
            self.owner[q] = idx

    def to_physical(self, lp: PauliOperator) -> PauliOperator:
        if lp.n != len(self.logicals):
            raise ValueError("logical Pauli size does not match register")
        n = self.logicals[0].logical_x.n
        acc = PauliOperator.identity(n)
        for v in lp.support():
            lq = self.logicals[v]
            if lp.x[v]:
                acc = acc * lq.logical_x
            if lp.z[v]:
                acc = acc * lq.logical_z
        return acc.times_phase(lp.k)

    def to_logical(self, p: PauliOperator) -> PauliOperator:
        d = len(self.logicals)
        parts: dict[int, list[int]] = {}
        for q in p.support():
            if q not in self.owner:
                raise ValueError(f"qubit {q} is not part of any logical encoding")
            parts.setdefault(self.owner[q], []).append(int(q))
        x = np.zeros(d, np.uint8)
        z = np.zeros(d, np.uint8)
        k = p.k
        for v, qs in parts.items():
            piece = p.restrict(qs)
            kv, a, b = self.logicals[v].decompose(piece)
            x[v], z[v] = a, b
            k += kv
        return PauliOperator(x, z, k)


# -- cluster stabilizers ------------------------------------------------------


@dataclass
class ChainStabilizer:
    vertex: int  # index into the logical list
    physical: PauliOperator
    logical: PauliOperator  # on the logical register

    @property
    def form(self) -> str:
        """'X' or 'Y': the Pauli acting on the central vertex."""
        v = self.vertex
        return {(1, 0): "X", (1, 1): "Y"}.get((int(self.logical.x[v]), int(self.logical.z[v])), "?")

    @property
    def sign(self) -> int:
        return self.logical.sign


def derive_chain_stabilizers(
    record: OutcomeRecord,
    site_map: SiteMap,
    logicals: list[LogicalQubit],
    state: StabilizerState,
) -> list[ChainStabilizer]:
    """One stabilizer per logical qubit from products of singlet stabilizers.

    For logical V the product runs over every singlet edge touching V: edges
    inside V use the basis-flip axis of V, edges to a neighbouring domain use
    that neighbour's axis.  Each product is checked to stabilize ``state``
    and re-expressed on the logical register as +/- Z X Z or +/- Z Y Z.
    """
    n = site_map.n_qubits
    reg = LogicalRegister(logicals)
    if any(lq.removed for lq in logicals):
        raise ValueError("edge-product construction needs unreduced encodings")
    # axis recorded by the POVM must agree with the domains
    for lq in logicals:
        for i in lq.domain.sites:
            if record.axes[(lq.domain.chain, i)] != lq.axis:
                raise ValueError("logicals do not match the outcome record")
    out = []
    edge_list = site_map.edges
    for v, lq in enumerate(logicals):
        k_op = PauliOperator.identity(n)
        for i, j in edge_list:
            oi, oj = reg.owner.get(i), reg.owner.get(j)
            if v not in (oi, oj):
                continue
            if oi == oj:
                letter = FLIP[lq.axis]
            else:
                other = oj if oi == v else oi
                letter = SIGMA[logicals[other].axis]
            k_op = k_op * PauliOperator.from_sparse(n, {i: letter, j: letter}, sign=-1)
        if state.expectation(k_op) != 1:
            raise CertificationError(f"derived stabilizer for {lq.domain.label} is not in the state")
        out.append(ChainStabilizer(v, k_op, reg.to_logical(k_op)))
    return out


# -- graph states ----------------------------------------------------------------

_CORRECTION_GATES = {"Y": ["SDG"], "X": []}


@dataclass
class GraphState:
    vertices: list[str]
    edges: set[tuple[int, int]] = field(default_factory=set)
    corrections: dict[int, list[str]] = field(default_factory=dict)
    signs: dict[int, int] = field(default_factory=dict)
    forms: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.edges = {tuple(sorted(e)) for e in self.edges}
        for a, b in self.edges:
            if a == b:
                raise ValueError("self-loop in graph state")

    def neighbors(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def stabilizer(self, v: int) -> PauliOperator:
        d = len(self.vertices)
        ops = {v: "X"}
        for u in self.neighbors(v):
            ops[u] = "Z"
        return PauliOperator.from_sparse(d, ops)

    def stabilizer_state(self) -> StabilizerState:
        return StabilizerState.from_generators(
            [self.stabilizer(v) for v in range(len(self.vertices))], n=len(self.vertices)
        )

    def is_bipartite(self) -> bool:
        color: dict[int, int] = {}
        for start in range(len(self.vertices)):
            if start in color:
                continue
            color[start] = 0
            stack = [start]
            while stack:
                v = stack.pop()
                for u in self.neighbors(v):
                    if u not in color:
                        color[u] = 1 - color[v]
                        stack.append(u)
                    elif color[u] == color[v]:
                        return False
        return True

    def components(self) -> int:
        seen: set[int] = set()
        count = 0
        for start in range(len(self.vertices)):
            if start in seen:
                continue
            count += 1
            stack = [start]
            seen.add(start)
            while stack:
                v = stack.pop()
                for u in self.neighbors(v):
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
        return count

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "adjacency": {
                name: sorted(self.vertices[u] for u in self.neighbors(i))
                for i, name in enumerate(self.vertices)
            },
            "corrections": {self.vertices[v]: g for v, g in sorted(self.corrections.items())},
            "signs": {self.vertices[v]: s for v, s in sorted(self.signs.items())},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  n{i} [label="{v}"];')
        for a, b in sorted(self.edges):
            lines.append(f"  n{a} -- n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def path_graph(names: list[str]) -> GraphState:
    return GraphState(list(names), {(i, i + 1) for i in range(len(names) - 1)})


def _expected_shape(lp: PauliOperator, v: int, graph: GraphState) -> bool:
    nb = graph.neighbors(v)
    for u in range(lp.n):
        xb, zb = int(lp.x[u]), int(lp.z[u])
        if u == v:
            if xb != 1:
                return False
        elif u in nb:
            if (xb, zb) != (0, 1):
                return False
        elif xb or zb:
            return False
    return True


def certify_cluster(
    logicals: list[LogicalQubit],
    stabilizers: list[ChainStabilizer],
    state: StabilizerState,
    graph: GraphState | None = None,
) -> GraphState:
    """Certify that the logicals carry ``graph`` (default: the path) up to local S/Z.

    Checks that every stabilizer and every code stabilizer lies in the state's
    group, that together they are independent, that each stabilizer has the
    form +/- L_v prod Z_neighbours with L in {X, Y}, and that after the local
    corrections the logical group canonicalizes to the graph-state group.
    """
    names = [lq.domain.label for lq in logicals]
    graph = graph if graph is not None else path_graph(names)
    if len(stabilizers) != len(logicals):
        raise CertificationError("need exactly one stabilizer per logical qubit")
    physical = [st.physical for st in stabilizers]
    for lq in logicals:
        physical += lq.stabilizers
    values = state.expectations(physical)
    if np.any(values != 1):
        bad = int(np.flatnonzero(values != 1)[0])
        raise CertificationError(f"{physical[bad].sparse_label()} does not stabilize the state")
    bits = np.array([np.concatenate([p.x, p.z]) for p in physical], dtype=np.uint8)
    if gf2_rank(bits) != len(physical):
        raise CertificationError("derived stabilizers are not independent")

    d = len(logicals)
    result = GraphState(list(names), set(graph.edges))
    logical_state = StabilizerState.from_generators([st.logical for st in stabilizers], n=d)
    for st in stabilizers:
        v = st.vertex
        if not _expected_shape(st.logical, v, graph):
            raise CertificationError(f"stabilizer {st.logical} does not match the graph at {names[v]}")
        form = st.form
        gates = list(_CORRECTION_GATES[form])
        if st.sign == -1:
            gates.append("Z")
        result.forms[v] = form
        result.signs[v] = st.sign
        result.corrections[v] = gates
        for g in gates:
            apply_clifford(logical_state, g, v)
    if canonical_form(logical_state) != canonical_form(graph.stabilizer_state()):
        raise CertificationError("corrected group differs from the graph-state group")
    return result


def find_graph_stabilizers(
    state: StabilizerState, register: LogicalRegister, graph: GraphState
) -> list[ChainStabilizer]:
    """Search, per vertex, for +/- L_v prod Z_nb (L in X, Y) stabilizing the state."""
    d = len(register)
    out = []
    for v in range(d):
        base = graph.stabilizer(v)  # X_v Z_nb
        found = None
        for form in ("X", "Y"):
            lp = base.copy()
            if form == "Y":
                lp.z[v] = 1
                lp = lp.times_phase(1)  # i X Z = Y
            phys = register.to_physical(lp)
            value = state.expectation(phys)
            if value != 0:
                signed = lp if value == 1 else -lp
                found = ChainStabilizer(v, register.to_physical(signed), signed)
                break
        if found is None:
            raise CertificationError(f"no graph stabilizer found at vertex {graph.vertices[v]}")
        out.append(found)
    return out


def measure_out(
    state: StabilizerState,
    register: LogicalRegister,
    idx: int,
    ops: list[PauliOperator],
    rng: np.random.Generator | None,
    forced: list[int] | None = None,
) -> tuple[LogicalQubit, int, Fraction]:
    """Measure single-site / single-b observables that shrink logical ``idx``.

    Every op must be a factor of the current logical X restricted to the
    qubits it touches; the byproduct is the parity of the outcomes (a logical
    Z on the shrunken encoding).  Returns (new logical, byproduct, probability).
    """
    lq = register.logicals[idx]
    measured: set[int] = set()
    parity = 0
    prob = Fraction(1)
    removed_x = PauliOperator.identity(state.n)
    for j, op in enumerate(ops):
        res = state.measure(op, None if forced is None else forced[j], rng)
        parity ^= res.outcome
        prob *= res.probability
        measured |= set(op.support().tolist())
        removed_x = removed_x * op
    new = build_logical(lq.domain, _site_map_of(register), lq.removed | measured)
    expected_removed = lq.logical_x.restrict(sorted(measured))
    if not removed_x.same_up_to_phase(expected_removed):
        raise ValueError("measured operators do not factor the logical X")
    register.replace(idx, new)
    return new, parity, prob


def _site_map_of(register: LogicalRegister) -> SiteMap:
    if register.site_map is None:
        raise ValueError("register has no site map attached")
    return register.site_map


def reduce_domain(
    state: StabilizerState,
    register: LogicalRegister,
    idx: int,
    rng: np.random.Generator | None = None,
    forced: list[int] | None = None,
) -> tuple[StabilizerState, LogicalQubit, int]:
    """Shrink logical ``idx`` onto its first remaining A-site.

    All remaining spin-1/2s of the encoding are measured in the |+/->_a basis,
    then every other A-site in the (|000> +/- |111>)_a basis.  Returns the
    state, the single-site encoding and the logical-Z byproduct bit.
    """
    sm = _site_map_of(register)
    lq = register.logicals[idx]
    n = state.n
    f = FLIP[lq.axis]
    ops = [PauliOperator.from_sparse(n, {q: f}) for q in lq.qubits if sm.is_b(q)]
    for i in lq.kept_sites[1:]:
        site = sm.site(lq.domain.chain, i)
        ops.append(PauliOperator.from_sparse(n, {q: f for q in site.qubits}))
    new, byproduct, _ = measure_out(state, register, idx, ops, rng, forced)
    return state, new, byproduct
