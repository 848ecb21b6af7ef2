"""Quasichain and CMDB 2D geometry in the virtual-qubit picture.

Every spin-3/2 A-site is three virtual qubits (legs ``left``, ``dangling``,
``right``).  Each chain carries one dangling spin-1/2 per A-site plus two
boundary spin-1/2s at the open ends.  Qubit ids are assigned chain by chain as

    b_0, (v1, v2, v3, b_1), (v1, v2, v3, b_2), ..., b_{N+1}

so a chain of N sites owns 4N + 2 consecutive ids.

In the 2D layout the dangling spin-1/2 of the site in column ``k`` of chain
``c`` points up (towards chain c+1) when ``k + c`` is even and down otherwise;
chain c+1 is thus the mirror image of chain c.  An up-b of chain c and a
down-b of chain c+1 sitting in the same column merge into one B spin, which
gives alternating vertical bonds (brick-wall connectivity).  ``stagger``
shifts whole chains horizontally.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from cmdb_mbqc.tableau import StabilizerState, pack_bits

SITEMAP_VERSION = 1


class Layout(str, Enum):
    SINGLE_CHAIN = "single_chain"
    CMDB_2D = "cmdb_2d"


@dataclass(frozen=True)
class LatticeSpec:
    chains: int = 1
    sites_per_chain: int = 3
    layout: Layout = Layout.SINGLE_CHAIN
    stagger: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "layout", Layout(self.layout))
        if self.sites_per_chain < 1:
            raise ValueError("sites_per_chain must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.layout is Layout.SINGLE_CHAIN and self.chains != 1:
            raise ValueError("single_chain layout has exactly one chain")
        if self.layout is Layout.CMDB_2D and self.chains < 2:
            raise ValueError("cmdb_2d layout needs at least 2 chains")
        if self.stagger is not None:
            object.__setattr__(self, "stagger", tuple(int(s) for s in self.stagger))
            if len(self.stagger) != self.chains:
                raise ValueError("stagger needs one offset per chain")

    @property
    def offsets(self) -> tuple[int, ...]:
        return self.stagger if self.stagger is not None else (0,) * self.chains

    @property
    def n_qubits(self) -> int:
        return self.chains * (4 * self.sites_per_chain + 2)

    def to_dict(self) -> dict:
        return {
            "chains": self.chains,
            "sites_per_chain": self.sites_per_chain,
            "layout": self.layout.value,
            "stagger": list(self.stagger) if self.stagger is not None else None,
        }


@dataclass(frozen=True)
class ASite:
    chain: int
    index: int  # 0-based position along the chain
    column: int
    qubits: tuple[int, int, int]  # (left, dangling, right)
    dangling_b: int


@dataclass(frozen=True)
class BParticle:
    qubit: int
    chain: int
    site: int | None  # attached A-site index, None for the two end spins
    kind: str  # "dangling" or "boundary"
    direction: str | None  # "up" / "down" for dangling spins in 2D, else None


@dataclass
class SiteMap:
    spec: LatticeSpec
    n_qubits: int
    a_sites: list[ASite]
    b_particles: list[BParticle]
    b_merges: list[tuple[int, int]]  # (b on chain c, b on chain c+1)
    edges: list[tuple[int, int]]
    boundary_b: list[int]
    partner: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.partner:
            for a, b in self.edges:
                self.partner[a] = b
                self.partner[b] = a
        self._site_index = {(s.chain, s.index): s for s in self.a_sites}
        self._b_index = {b.qubit: b for b in self.b_particles}
        self._owner = {}
        for s in self.a_sites:
            for leg, q in enumerate(s.qubits):
                self._owner[q] = (s.chain, s.index, leg)

    def site(self, chain: int, index: int) -> ASite:
        return self._site_index[(chain, index)]

    def chain_sites(self, chain: int) -> list[ASite]:
        return [s for s in self.a_sites if s.chain == chain]

    def b_particle(self, qubit: int) -> BParticle:
        return self._b_index[qubit]

    def owner(self, qubit: int) -> tuple[int, int, int] | None:
        """(chain, site index, leg) for a virtual qubit, None for a b qubit."""
        return self._owner.get(qubit)

    def is_b(self, qubit: int) -> bool:
        return qubit in self._b_index

    def chain_qubits(self, chain: int) -> range:
        per = 4 * self.spec.sites_per_chain + 2
        return range(chain * per, (chain + 1) * per)

    def chain_boundary(self, chain: int) -> tuple[int, int]:
        q = self.chain_qubits(chain)
        return q.start, q.stop - 1

    def site_order(self) -> list[tuple[int, int]]:
        """Chain-major, left-to-right."""
        return [(s.chain, s.index) for s in self.a_sites]

    def merge_of(self, qubit: int) -> int | None:
        for i, (b1, b2) in enumerate(self.b_merges):
            if qubit in (b1, b2):
                return i
        return None

    def chain_submap(self, chain: int) -> tuple[SiteMap, int]:
        """Single-chain map with ids shifted to start at 0, plus the shift."""
        shift = self.chain_qubits(chain).start
        sub_spec = LatticeSpec(1, self.spec.sites_per_chain, Layout.SINGLE_CHAIN)
        sub = _build_map(sub_spec)
        return sub, shift

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": SITEMAP_VERSION,
            "spec": self.spec.to_dict(),
            "n_qubits": self.n_qubits,
            "a_sites": [asdict(s) for s in self.a_sites],
            "b_particles": [asdict(b) for b in self.b_particles],
            "b_merges": [list(m) for m in self.b_merges],
            "edges": [list(e) for e in self.edges],
            "boundary_b": list(self.boundary_b),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> SiteMap:
        if data.get("version") != SITEMAP_VERSION:
            raise ValueError(f"unsupported SiteMap version {data.get('version')!r}")
        spec_d = data["spec"]
        spec = LatticeSpec(
            spec_d["chains"],
            spec_d["sites_per_chain"],
            Layout(spec_d["layout"]),
            tuple(spec_d["stagger"]) if spec_d.get("stagger") is not None else None,
        )
        return cls(
            spec=spec,
            n_qubits=data["n_qubits"],
            a_sites=[ASite(**{**s, "qubits": tuple(s["qubits"])}) for s in data["a_sites"]],
            b_particles=[BParticle(**b) for b in data["b_particles"]],
            b_merges=[tuple(m) for m in data["b_merges"]],
            edges=[tuple(e) for e in data["edges"]],
            boundary_b=list(data["boundary_b"]),
        )

    @classmethod
    def from_json(cls, text: str) -> SiteMap:
        return cls.from_dict(json.loads(text))


def _build_map(spec: LatticeSpec) -> SiteMap:
    n_sites = spec.sites_per_chain
    per_chain = 4 * n_sites + 2
    a_sites: list[ASite] = []
    bs: list[BParticle] = []
    edges: list[tuple[int, int]] = []
    two_d = spec.layout is Layout.CMDB_2D
    for c in range(spec.chains):
        base = c * per_chain
        left_b = base
        right_b = base + per_chain - 1
        bs.append(BParticle(left_b, c, None, "boundary", None))
        prev_right = left_b
        for i in range(n_sites):
            v1, v2, v3, b = (base + 1 + 4 * i + j for j in range(4))
            column = i + spec.offsets[c]
            direction = None
            if two_d:
                direction = "up" if (column + c) % 2 == 0 else "down"
            a_sites.append(ASite(c, i, column, (v1, v2, v3), b))
            bs.append(BParticle(b, c, i, "dangling", direction))
            edges.append((prev_right, v1))
            edges.append((v2, b))
            prev_right = v3
        edges.append((prev_right, right_b))
        bs.append(BParticle(right_b, c, None, "boundary", None))

    merges: list[tuple[int, int]] = []
    if two_d:
        by_pos = {(s.chain, s.column): s for s in a_sites}
        dir_of = {b.qubit: b.direction for b in bs}
        for c in range(spec.chains - 1):
            for s in a_sites:
                if s.chain != c or dir_of[s.dangling_b] != "up":
                    continue
                other = by_pos.get((c + 1, s.column))
                if other is not None and dir_of[other.dangling_b] == "down":
                    merges.append((s.dangling_b, other.dangling_b))
    merged = {q for m in merges for q in m}
    boundary = [b.qubit for b in bs if b.qubit not in merged]
    return SiteMap(spec, spec.n_qubits, a_sites, bs, merges, edges, boundary)


def singlet_state(n: int, edges: list[tuple[int, int]], history: list | None = None) -> StabilizerState:
    """Product of singlets: generators -X_i X_j, -Z_i Z_j per edge."""
    m = len(edges)
    if 2 * m != n:
        raise ValueError("edges must form a perfect matching")
    sx = np.zeros((n, n), np.uint8)
    sz = np.zeros((n, n), np.uint8)
    dx = np.zeros((n, n), np.uint8)
    dz = np.zeros((n, n), np.uint8)
    for e, (i, j) in enumerate(edges):
        sx[2 * e, [i, j]] = 1
        sz[2 * e + 1, [i, j]] = 1
        dz[2 * e, i] = 1
        dx[2 * e + 1, j] = 1
    ks = np.full(n, 2, np.int64)
    return StabilizerState(n, pack_bits(sx, n), pack_bits(sz, n), ks,
                           pack_bits(dx, n), pack_bits(dz, n), history)


def build(spec: LatticeSpec, record_history: bool = False) -> tuple[SiteMap, StabilizerState]:
    """Site map plus the all-singlets state (symmetric projection deferred to the POVM)."""
    site_map = _build_map(spec)
    state = singlet_state(site_map.n_qubits, site_map.edges, [] if record_history else None)
    return site_map, state


def build_map(spec: LatticeSpec) -> SiteMap:
    return _build_map(spec)


@dataclass(frozen=True)
class HamiltonianTerm:
    """P^S on a pair of spins.  ``first``/``second`` are ("A", chain, index) or ("b", qubit)."""

    total_spin: int
    first: tuple
    second: tuple
    qubits_first: tuple[int, ...]
    qubits_second: tuple[int, ...]
    merged_into: tuple[int, int] | None = None  # (merge id, slot 1|2) if b belongs to a B

    @property
    def label(self) -> str:
        def name(t):
            return f"A{t[2] + 1}" if t[0] == "A" else f"b{t[2]}"

        return f"P{self.total_spin}({name(self.first)},{name(self.second)})"


def hamiltonian_terms(spec: LatticeSpec) -> list[HamiltonianTerm]:
    """Projector terms of the quasichain Hamiltonian.

    A-A bonds carry P^{S=3}, A-b bonds P^{S=2}.  For the 2D layout the same
    chain terms are returned, with every b that belongs to a merged B tagged
    by ``merged_into``: after the merge map those b spin operators are
    observables of B.  b names use 0..N+1 along each chain.
    """
    site_map = _build_map(spec)
    merge_slot = {}
    for mid, (b1, b2) in enumerate(site_map.b_merges):
        merge_slot[b1] = (mid, 1)
        merge_slot[b2] = (mid, 2)
    n_sites = spec.sites_per_chain
    terms: list[HamiltonianTerm] = []
    for c in range(spec.chains):
        sites = site_map.chain_sites(c)
        left_b, right_b = site_map.chain_boundary(c)
        for i in range(n_sites - 1):
            a, b = sites[i], sites[i + 1]
            terms.append(HamiltonianTerm(3, ("A", c, i), ("A", c, i + 1), a.qubits, b.qubits))
        for i, s in enumerate(sites):
            terms.append(
                HamiltonianTerm(2, ("A", c, i), ("b", c, i + 1), s.qubits, (s.dangling_b,),
                                merge_slot.get(s.dangling_b))
            )
        terms.append(HamiltonianTerm(2, ("A", c, 0), ("b", c, 0), sites[0].qubits, (left_b,)))
        terms.append(
            HamiltonianTerm(2, ("A", c, n_sites - 1), ("b", c, n_sites + 1), sites[-1].qubits, (right_b,))
        )
    return terms
