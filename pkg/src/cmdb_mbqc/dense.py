"""Full state-vector reference used to cross-check the tableau path.

Qubit 0 is the most significant bit of the amplitude index, matching
:meth:`PauliOperator.to_matrix` and the SiteMap id order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from cmdb_mbqc import spin
from cmdb_mbqc.lattice import LatticeSpec, SiteMap, build_map, hamiltonian_terms
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.tableau import StabilizerState

DEFAULT_CAP = 22
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


class DenseCapExceeded(ValueError):
    pass


@dataclass
class DenseState:
    n: int
    amplitudes: np.ndarray

    @classmethod
    def zeros(cls, n: int, cap: int = DEFAULT_CAP) -> DenseState:
        _check_cap(n, cap)
        amp = np.zeros(2**n, dtype=complex)
        amp[0] = 1.0
        return cls(n, amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> DenseState:
        return DenseState(self.n, self.amplitudes.copy())

    def normalized(self) -> DenseState:
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize a zero vector")
        return DenseState(self.n, self.amplitudes / nrm)

    def fix_phase(self) -> DenseState:
        """Make the first non-negligible amplitude real and positive."""
        amp = self.amplitudes
        idx = np.flatnonzero(np.abs(amp) > 1e-12 * max(1.0, np.abs(amp).max()))
        if idx.size:
            a = amp[idx[0]]
            amp = amp * (abs(a) / a)
        return DenseState(self.n, amp)

    # -- operators ---------------------------------------------------------

    def apply(self, op: np.ndarray, qubits) -> DenseState:
        """Apply a 2^k x 2^k matrix to ``qubits`` (first listed = most significant)."""
        qubits = list(qubits)
        k = len(qubits)
        psi = self.amplitudes.reshape((2,) * self.n)
        op_t = np.asarray(op, dtype=complex).reshape((2,) * (2 * k))
        out = np.tensordot(op_t, psi, axes=(list(range(k, 2 * k)), qubits))
        out = np.moveaxis(out, list(range(k)), qubits)
        return DenseState(self.n, np.ascontiguousarray(out).reshape(-1))

    def apply_pauli(self, p: PauliOperator) -> DenseState:
        if p.n != self.n:
            raise ValueError("Pauli length mismatch")
        # X^x Z^z: sign flips on the |1> half of each Z axis, then axis reversals
        t = self.amplitudes.reshape((2,) * self.n).copy()
        for q in np.flatnonzero(p.z):
            t[(slice(None),) * int(q) + (1,)] *= -1
        x_axes = tuple(int(q) for q in np.flatnonzero(p.x))
        if x_axes:
            t = np.flip(t, axis=x_axes)
        out = np.ascontiguousarray(t).reshape(-1)
        if p.k % 4:
            out *= 1j**p.k
        return DenseState(self.n, out)

    def expectation(self, p: PauliOperator) -> complex:
        return complex(np.vdot(self.amplitudes, self.apply_pauli(p).amplitudes))

    def project_pauli(self, p: PauliOperator, outcome: int = 0) -> DenseState:
        """(I + (-1)^outcome p) / 2, unnormalized."""
        pp = self.apply_pauli(p).amplitudes
        sign = 1 - 2 * outcome
        return DenseState(self.n, (self.amplitudes + sign * pp) / 2)

    def dump(self, ids: list[int] | None = None) -> bytes:
        """Header (magic, n, ids) followed by little-endian interleaved re/im doubles."""
        ids = list(range(self.n)) if ids is None else list(ids)
        header = b"DNST" + struct.pack("<I", self.n) + struct.pack(f"<{self.n}I", *ids)
        body = np.asarray(self.amplitudes, dtype="<c16").tobytes()
        return header + body

    @classmethod
    def load(cls, blob: bytes) -> tuple[DenseState, list[int]]:
        if blob[:4] != b"DNST":
            raise ValueError("not a dense-state dump")
        n = struct.unpack("<I", blob[4:8])[0]
        ids = list(struct.unpack(f"<{n}I", blob[8 : 8 + 4 * n]))
        amp = np.frombuffer(blob[8 + 4 * n :], dtype="<c16").astype(complex)
        return cls(n, amp), ids


def _mask(bits: np.ndarray) -> int:
    n = len(bits)
    return int(sum(1 << (n - 1 - q) for q in np.flatnonzero(bits)))


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise DenseCapExceeded(f"{n} qubits exceeds the dense cap of {cap}")


def fidelity(a: DenseState, b: DenseState) -> float:
    if a.n != b.n:
        raise ValueError("states act on different qubit counts")
    na, nb = np.vdot(a.amplitudes, a.amplitudes).real, np.vdot(b.amplitudes, b.amplitudes).real
    if na == 0 or nb == 0:
        raise ValueError("zero-norm state")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 / (na * nb))


# -- spin operators ----------------------------------------------------------


class SpinOperatorSet:
    """Spin matrices and pair projectors embedded into the virtual-qubit picture."""

    def __init__(self):
        self.iso = spin.symmetric_isometry()  # 8 x 4
        self.s32 = spin.spin_matrices(1.5)
        self.s12 = spin.spin_matrices(0.5)

    def projector(self, s1: float, s2: float, total: float) -> np.ndarray:
        return spin.total_spin_projector(s1, s2, total)

    def embedded_pair_projector(self, kind: str, total: int) -> np.ndarray:
        """P^S on (A, A) as a 64 x 64 or on (A, b) as a 16 x 16 qubit operator."""
        if kind == "AA":
            p = spin.total_spin_projector(1.5, 1.5, total)
            v = np.kron(self.iso, self.iso)
        elif kind == "Ab":
            p = spin.total_spin_projector(1.5, 0.5, total)
            v = np.kron(self.iso, np.eye(2))
        else:
            raise ValueError(kind)
        return v @ p @ v.T


_SPINS = SpinOperatorSet()


def singlet_product(site_map: SiteMap, cap: int = DEFAULT_CAP) -> DenseState:
    n = site_map.n_qubits
    _check_cap(n, cap)
    psi = np.ones(1, dtype=complex)
    order: list[int] = []
    for i, j in site_map.edges:
        psi = np.kron(psi, SINGLET)
        order += [i, j]
    # psi is indexed by qubits in ``order``; permute into id order.
    t = psi.reshape((2,) * n)
    t = np.transpose(t, np.argsort(order))
    return DenseState(n, np.ascontiguousarray(t).reshape(-1))


def build_aklt(spec: LatticeSpec | SiteMap, cap: int = DEFAULT_CAP) -> DenseState:
    """Singlets on every edge, then the symmetric projector on every A triple, normalized."""
    site_map = spec if isinstance(spec, SiteMap) else build_map(spec)
    state = singlet_product(site_map, cap)
    proj = spin.symmetric_projector()
    for s in site_map.a_sites:
        state = state.apply(proj, s.qubits)
    return state.normalized().fix_phase()


def hamiltonian_apply(spec: LatticeSpec, state: DenseState) -> DenseState:
    """H |psi> with H the sum of projector terms from :func:`hamiltonian_terms`."""
    out = np.zeros_like(state.amplitudes)
    for term in hamiltonian_terms(spec):
        kind = "AA" if term.second[0] == "A" else "Ab"
        op = _SPINS.embedded_pair_projector(kind, term.total_spin)
        out += state.apply(op, term.qubits_first + term.qubits_second).amplitudes
    return DenseState(state.n, out)


def apply_merge_unitary(state: DenseState, site_map: SiteMap) -> DenseState:
    """Relabel every merged (b1, b2) pair into the spin-3/2 level basis of B.

    The four levels of B are stored on the same two qubit slots as the
    binary index of m = 3/2, 1/2, -1/2, -3/2 (b1 slot = high bit).
    """
    u = spin.merge_unitary()
    for b1, b2 in site_map.b_merges:
        state = state.apply(u, (b1, b2))
    return state


def povm_kraus(axis: str) -> np.ndarray:
    """sqrt(2/3) (|000>_a<000| + |111>_a<111|) on three qubits."""
    basis = {
        "z": (np.array([1, 0], complex), np.array([0, 1], complex)),
        "x": (np.array([1, 1], complex) / np.sqrt(2), np.array([1, -1], complex) / np.sqrt(2)),
        "y": (np.array([1, 1j], complex) / np.sqrt(2), np.array([1, -1j], complex) / np.sqrt(2)),
    }[axis]
    v0 = np.kron(np.kron(basis[0], basis[0]), basis[0])
    v1 = np.kron(np.kron(basis[1], basis[1]), basis[1])
    return np.sqrt(2 / 3) * (np.outer(v0, v0.conj()) + np.outer(v1, v1.conj()))


def povm_kraus_spin32(axis: str) -> np.ndarray:
    """The spin-3/2 form (S_a^2 - 1/4)/sqrt(6) pushed into the virtual picture."""
    v = spin.symmetric_isometry()
    return v @ spin.spin32_povm_element(axis) @ v.T


def apply_kraus(state: DenseState, site: tuple[int, int, int], axis: str) -> tuple[DenseState, float]:
    """Apply the virtual-qubit POVM element; returns (unnormalized state, probability)."""
    pre = np.vdot(state.amplitudes, state.amplitudes).real
    out = state.apply(povm_kraus(axis), site)
    post = np.vdot(out.amplitudes, out.amplitudes).real
    return out, (post / pre if pre > 0 else 0.0)


def tableau_to_dense(s: StabilizerState, cap: int = DEFAULT_CAP) -> DenseState:
    """The joint +1 eigenvector of a full-rank stabilizer group."""
    if not s.is_pure:
        raise ValueError("tableau_to_dense needs a full-rank state")
    _check_cap(s.n, cap)
    gens = s.generators
    seeds = [DenseState.zeros(s.n, cap)]
    rng = np.random.default_rng(12345)
    for attempt in range(4):
        if attempt < len(seeds):
            psi = seeds[attempt]
        else:
            amp = rng.normal(size=2**s.n) + 1j * rng.normal(size=2**s.n)
            psi = DenseState(s.n, amp)
        for g in gens:
            psi = psi.project_pauli(g, 0)
            if psi.norm < 1e-9:
                break
        if psi.norm > 1e-6:
            return psi.normalized().fix_phase()
    raise RuntimeError("failed to find a stabilized vector")


def replay(history: list, state: DenseState) -> tuple[DenseState, list[float]]:
    """Re-run a tableau operation log on a dense state with the same outcomes.

    Returns the normalized final state and the probability of every logged
    random step (measurements and POVM outcomes).
    """
    probs: list[float] = []
    for entry in history:
        kind = entry[0]
        if kind == "measure":
            _, p, outcome = entry
            pre = np.vdot(state.amplitudes, state.amplitudes).real
            state = state.project_pauli(p, outcome)
            post = np.vdot(state.amplitudes, state.amplitudes).real
            probs.append(post / pre)
            state = state.normalized()
        elif kind == "unitary":
            _, u, targets = entry
            state = state.apply(u, targets)
        elif kind == "povm":
            _, site, axis = entry
            state, p = apply_kraus(state, site, axis)
            probs.append(p)
            state = state.normalized()
        else:
            raise ValueError(f"unknown history entry {kind!r}")
    return state.fix_phase(), probs


def as_fraction(x: float, max_den: int = 1 << 20) -> Fraction:
    return Fraction(x).limit_denominator(max_den)
