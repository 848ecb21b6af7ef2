"""Connecting or disconnecting two logical qubits through a merged b pair.

A merged pair (b1, b2) sits on neighbouring chains.  With u and v the
logical qubits owning b1 and b2, and a_u, a_v their POVM axes:

* disconnect: flip each b in its own axis basis (|0>_a<1| + |1>_a<0|), then
  measure b1 in the |+/->_{a_u} basis and b2 in |+/->_{a_v}; the outcomes
  are Z byproducts on u and v.
* connect: the same flips, then
  CP = |0><0|_{a_u} (x) 1 + |1><1|_{a_u} (x) sigma_{a_v}, then the same
  measurements.  On the encoded qubits this is CZ(u, v) up to the byproducts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from cmdb_mbqc.encoding import LogicalRegister, measure_out
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.povm import FLIP, SIGMA, PovmAxis
from cmdb_mbqc.tableau import GATE_MATRICES, StabilizerState, apply_clifford


class CouplingError(ValueError):
    pass


class Mode(str, Enum):
    DISCONNECT = "disconnect"
    CONNECT = "connect"


@dataclass(frozen=True)
class CouplingChoice:
    merge: int  # index into SiteMap.b_merges
    mode: Mode
    axes: tuple[PovmAxis, PovmAxis]  # (a_u, a_v)

    def to_dict(self) -> dict:
        return {"merge": self.merge, "mode": self.mode.value, "axes": [a.value for a in self.axes]}


def make_choice(register: LogicalRegister, merge: int, mode: Mode | str) -> CouplingChoice:
    _, _, u, v = _endpoints(register, merge)
    return CouplingChoice(merge, Mode(mode), (register.logicals[u].axis, register.logicals[v].axis))


@dataclass
class PauliFrame:
    """Pending Pauli byproducts per logical vertex: state = prod X^x Z^z |ideal>."""

    x: dict[int, int] = field(default_factory=dict)
    z: dict[int, int] = field(default_factory=dict)

    def apply_x(self, v: int, bit: int = 1) -> None:
        self.x[v] = self.x.get(v, 0) ^ (bit & 1)

    def apply_z(self, v: int, bit: int = 1) -> None:
        self.z[v] = self.z.get(v, 0) ^ (bit & 1)

    def through_cz(self, u: int, v: int) -> None:
        """Push the frame through an ideal CZ(u, v): X_u -> X_u Z_v."""
        xu, xv = self.x.get(u, 0), self.x.get(v, 0)
        self.apply_z(v, xu)
        self.apply_z(u, xv)

    def merge(self, other: PauliFrame) -> None:
        for v, b in other.x.items():
            self.apply_x(v, b)
        for v, b in other.z.items():
            self.apply_z(v, b)

    def bits(self, v: int) -> tuple[int, int]:
        return self.x.get(v, 0), self.z.get(v, 0)

    def as_pauli(self, d: int) -> PauliOperator:
        x = np.array([self.x.get(v, 0) for v in range(d)], np.uint8)
        z = np.array([self.z.get(v, 0) for v in range(d)], np.uint8)
        return PauliOperator(x, z, 0)

    def to_dict(self) -> dict:
        return {
            str(v): "".join(l for l, b in (("X", self.x.get(v, 0)), ("Z", self.z.get(v, 0))) if b)
            for v in sorted(set(self.x) | set(self.z))
            if self.x.get(v, 0) or self.z.get(v, 0)
        }


def cp_matrix(control_axis: PovmAxis | str, target_axis: PovmAxis | str) -> np.ndarray:
    """|0><0|_a (x) 1 + |1><1|_a (x) sigma_b on two qubits."""
    return _cp(PovmAxis(control_axis).value, PovmAxis(target_axis).value)


@lru_cache(maxsize=None)
def _cp(a: str, b: str) -> np.ndarray:
    sa = GATE_MATRICES[SIGMA[PovmAxis(a)]]
    sb = GATE_MATRICES[SIGMA[PovmAxis(b)]]
    eye = np.eye(2)
    p0, p1 = (eye + sa) / 2, (eye - sa) / 2
    return np.kron(p0, eye) + np.kron(p1, sb)


def _endpoints(register: LogicalRegister, merge: int) -> tuple[int, int, int, int]:
    sm = register.site_map
    if sm is None:
        raise CouplingError("register has no site map attached")
    if not 0 <= merge < len(sm.b_merges):
        raise CouplingError(f"merge {merge} out of range")
    b1, b2 = sm.b_merges[merge]
    u, v = register.owner.get(b1), register.owner.get(b2)
    if u is None or v is None:
        raise CouplingError(f"b qubits of merge {merge} were already measured")
    if u == v:
        raise CouplingError("both b's belong to the same logical qubit")
    return b1, b2, u, v


def _checked(register: LogicalRegister, choice: CouplingChoice, mode: Mode):
    b1, b2, u, v = _endpoints(register, choice.merge)
    axes = (register.logicals[u].axis, register.logicals[v].axis)
    if tuple(choice.axes) != axes:
        raise CouplingError(f"choice axes {choice.axes} differ from recorded axes {axes}")
    return b1, b2, u, v


@dataclass
class CouplingOutcome:
    choice: CouplingChoice
    u: int
    v: int
    m1: int
    m2: int
    delta: PauliFrame
    probabilities: tuple[Fraction, Fraction]


def couple(
    state: StabilizerState,
    register: LogicalRegister,
    choice: CouplingChoice,
    rng: np.random.Generator | None = None,
    forced: tuple[int, int] | None = None,
) -> CouplingOutcome:
    """Either mode, with the per-b outcome probabilities kept."""
    b1, b2, u, v = _checked(register, choice, choice.mode)
    au, av = choice.axes
    apply_clifford(state, FLIP[au], b1)
    apply_clifford(state, FLIP[av], b2)
    if choice.mode is Mode.CONNECT:
        apply_clifford(state, cp_matrix(au, av), [b1, b2])
    n = state.n
    f1 = None if forced is None else [forced[0]]
    f2 = None if forced is None else [forced[1]]
    # measurement order b1 then b2 is fixed
    _, m1, p1 = measure_out(state, register, u, [PauliOperator.from_sparse(n, {b1: FLIP[au]})], rng, f1)
    _, m2, p2 = measure_out(state, register, v, [PauliOperator.from_sparse(n, {b2: FLIP[av]})], rng, f2)
    delta = PauliFrame()
    delta.apply_z(u, m1)
    delta.apply_z(v, m2)
    return CouplingOutcome(choice, u, v, m1, m2, delta, (p1, p2))


def disconnect(
    state: StabilizerState,
    register: LogicalRegister,
    choice: CouplingChoice,
    rng: np.random.Generator | None = None,
    forced: tuple[int, int] | None = None,
) -> tuple[StabilizerState, int, int, PauliFrame]:
    """Flip and measure both b's of the merge; returns (state, m1, m2, frame delta)."""
    if choice.mode is not Mode.DISCONNECT:
        raise CouplingError(f"choice is a {choice.mode.value}")
    out = couple(state, register, choice, rng, forced)
    return state, out.m1, out.m2, out.delta


def connect(
    state: StabilizerState,
    register: LogicalRegister,
    choice: CouplingChoice,
    rng: np.random.Generator | None = None,
    forced: tuple[int, int] | None = None,
) -> tuple[StabilizerState, int, int, PauliFrame]:
    """CZ between the logicals owning the merged pair; returns (state, m1, m2, frame delta)."""
    if choice.mode is not Mode.CONNECT:
        raise CouplingError(f"choice is a {choice.mode.value}")
    out = couple(state, register, choice, rng, forced)
    return state, out.m1, out.m2, out.delta


def endpoints(register: LogicalRegister, merge: int) -> tuple[int, int]:
    """Logical indices (u, v) that a merge would couple."""
    return _endpoints(register, merge)[2:]


def apply_frame(state: StabilizerState, register: LogicalRegister, frame: PauliFrame) -> StabilizerState:
    """Undo a frame physically by applying the encoded Paulis."""
    for v in sorted(set(frame.x) | set(frame.z)):
        xb, zb = frame.bits(v)
        lq = register.logicals[v]
        for bit, op in ((xb, lq.logical_x), (zb, lq.logical_z)):
            if not bit:
                continue
            for q in op.support():
                apply_clifford(state, op.letters()[q], int(q))
    return state
