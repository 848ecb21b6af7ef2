"""Stabilizer tableau with Pauli measurement, code-space projection and
canonicalization.

Rows are bit-packed into uint64 words (bit ``q`` of a row lives in word
``q >> 6`` at position ``q & 63``) and carry a phase exponent ``k`` in the
``i**k X**x Z**z`` convention of :mod:`cmdb_mbqc.pauli`.

A state of full rank may additionally carry destabilizers, which turns the
deterministic-measurement case into an O(n^2 / 64) lookup instead of a
Gaussian elimination.  States built by the lattice builder always have them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from cmdb_mbqc.pauli import PauliOperator


class TableauError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementResult:
    outcome: int
    deterministic: bool
    probability: Fraction

    @property
    def eigenvalue(self) -> int:
        return 1 - 2 * self.outcome


# -- bit packing ----------------------------------------------------------


def _n_words(n: int) -> int:
    return max(1, (n + 63) // 64)


def pack_bits(bits: np.ndarray, n: int) -> np.ndarray:
    """Pack a (..., n) 0/1 array into (..., words) uint64."""
    bits = np.asarray(bits, dtype=np.uint8)
    w = _n_words(n)
    pad = w * 64 - n
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(bits.shape[:-1] + (w,))


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :n]


def _parity(words: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(words).sum(axis=-1) & 1).astype(np.int64)


def _get_bit(rows: np.ndarray, q: int) -> np.ndarray:
    return ((rows[:, q >> 6] >> np.uint64(q & 63)) & np.uint64(1)).astype(np.uint8)


def _set_bit(rows: np.ndarray, q: int, values: np.ndarray) -> None:
    mask = np.uint64(1) << np.uint64(q & 63)
    col = rows[:, q >> 6]
    col &= ~mask
    col |= values.astype(np.uint64) << np.uint64(q & 63)


# -- Clifford conjugation tables -----------------------------------------

_SQ2 = 1 / np.sqrt(2)
GATE_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}


def _local_pauli_matrix(bits: tuple[int, ...], m: int) -> np.ndarray:
    return PauliOperator(np.array(bits[:m]), np.array(bits[m:])).to_matrix()


@lru_cache(maxsize=256)
def _table_from_key(key: bytes, m: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    u = np.frombuffer(key, dtype=complex).reshape(2**m, 2**m)
    return clifford_table(u, m)


def clifford_table(u: np.ndarray, m: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Conjugation table of an m-qubit Clifford.

    Entry ``p`` (bits x_0..x_{m-1}, z_0..z_{m-1} read as a binary number with
    x_0 most significant) holds ``(k, bits')`` such that
    ``u X^x Z^z u^dag = i^k X^x' Z^z'``.
    """
    u = np.asarray(u, dtype=complex)
    dim = 2**m
    if u.shape != (dim, dim) or not np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-10):
        raise TableauError("gate matrix is not unitary of the stated size")
    candidates = []
    for bits in itertools.product((0, 1), repeat=2 * m):
        candidates.append((bits, _local_pauli_matrix(bits, m)))
    table = []
    for bits, mat in candidates:
        image = u @ mat @ u.conj().T
        for cbits, cmat in candidates:
            # image = c * cmat with c a power of i
            c = np.trace(cmat.conj().T @ image) / dim
            if abs(abs(c) - 1) < 1e-9 and np.allclose(image, c * cmat, atol=1e-9):
                k = int(round(np.angle(c) / (np.pi / 2))) % 4
                if not np.isclose(1j**k, c, atol=1e-9):
                    raise TableauError("gate is not Clifford")
                table.append((k, cbits))
                break
        else:
            raise TableauError("gate is not Clifford")
    return tuple(table)


# -- the state ------------------------------------------------------------


class StabilizerState:
    """Generating set of a stabilizer group on ``n`` qubits.

    ``rank == n`` is a pure state; smaller ranks describe the uniform mixture
    over a code space.  Mutating methods work in place.
    """

    def __init__(
        self,
        n: int,
        xs: np.ndarray,
        zs: np.ndarray,
        ks: np.ndarray,
        dxs: np.ndarray | None = None,
        dzs: np.ndarray | None = None,
        history: list | None = None,
    ):
        self.n = n
        self.xs = xs
        self.zs = zs
        self.ks = np.asarray(ks, dtype=np.int64) % 4
        self.dxs = dxs
        self.dzs = dzs
        self.history = history

    # -- construction ---------------------------------------------------

    @classmethod
    def zero_state(cls, n: int) -> StabilizerState:
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), np.uint8)
        return cls(n, pack_bits(zero, n), pack_bits(eye, n), np.zeros(n, np.int64),
                   pack_bits(eye, n), pack_bits(zero, n))

    @classmethod
    def from_generators(
        cls,
        generators: list[PauliOperator] | list[str],
        n: int | None = None,
        destabilizers: list[PauliOperator] | None = None,
        check: bool = True,
    ) -> StabilizerState:
        gens = [PauliOperator.from_label(g) if isinstance(g, str) else g for g in generators]
        if n is None:
            if not gens:
                raise TableauError("cannot infer n from an empty generator list")
            n = gens[0].n
        if any(g.n != n for g in gens):
            raise TableauError("generator length mismatch")
        if any(not g.is_hermitian for g in gens):
            raise TableauError("stabilizer generators must have phase +1 or -1")
        if gens:
            x = np.stack([g.x for g in gens])
            z = np.stack([g.z for g in gens])
        else:
            x = np.zeros((0, n), np.uint8)
            z = np.zeros((0, n), np.uint8)
        ks = np.array([g.k for g in gens], dtype=np.int64)
        state = cls(n, pack_bits(x, n), pack_bits(z, n), ks)
        if check:
            state.check_invariants()
        if destabilizers is not None:
            state.dxs = pack_bits(np.stack([d.x for d in destabilizers]), n)
            state.dzs = pack_bits(np.stack([d.z for d in destabilizers]), n)
        elif len(gens) == n and n > 0:
            state._compute_destabilizers()
        return state

    def copy(self) -> StabilizerState:
        return StabilizerState(
            self.n,
            self.xs.copy(),
            self.zs.copy(),
            self.ks.copy(),
            None if self.dxs is None else self.dxs.copy(),
            None if self.dzs is None else self.dzs.copy(),
            None if self.history is None else list(self.history),
        )

    # -- views ------------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.xs.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.rank == self.n

    def generator(self, i: int) -> PauliOperator:
        return PauliOperator(
            unpack_bits(self.xs[i], self.n), unpack_bits(self.zs[i], self.n), int(self.ks[i])
        )

    @property
    def generators(self) -> list[PauliOperator]:
        return [self.generator(i) for i in range(self.rank)]

    def bit_matrix(self) -> np.ndarray:
        """Unpacked (rank, 2n) binary symplectic matrix [x | z]."""
        return np.concatenate(
            [unpack_bits(self.xs, self.n), unpack_bits(self.zs, self.n)], axis=1
        )

    def __repr__(self) -> str:
        gens = ", ".join(str(g) for g in self.generators[:6])
        more = "" if self.rank <= 6 else ", ..."
        return f"StabilizerState(n={self.n}, rank={self.rank}, [{gens}{more}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerState):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.zs, other.zs)
            and np.array_equal(self.ks, other.ks)
        )

    def check_invariants(self) -> None:
        """Raise if generators fail to commute or to be independent."""
        if np.any((self.ks - _row_ny(self.xs, self.zs)) % 2):
            raise TableauError("non-Hermitian generator")
        r = self.rank
        if r:
            xs, zs = self.xs, self.zs
            anti = (
                np.bitwise_count(xs[:, None, :] & zs[None, :, :]).sum(-1)
                + np.bitwise_count(zs[:, None, :] & xs[None, :, :]).sum(-1)
            ) & 1
            if np.any(anti):
                raise TableauError("generators do not commute")
            if gf2_rank(self.bit_matrix()) != r:
                raise TableauError("generators are not independent")

    # -- queries -------------------------------------------------------------

    def _anticommuting(self, xs, zs, p_x, p_z) -> np.ndarray:
        return _parity((xs & p_z) ^ (zs & p_x))

    def _packed(self, p: PauliOperator) -> tuple[np.ndarray, np.ndarray]:
        if p.n != self.n:
            raise TableauError(f"Pauli length {p.n} does not match state size {self.n}")
        return pack_bits(p.x, self.n), pack_bits(p.z, self.n)

    def _row_product(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
        """Ordered product of the given stabilizer rows (packed x, z, k)."""
        w = self.xs.shape[1]
        acc_x = np.zeros(w, np.uint64)
        acc_z = np.zeros(w, np.uint64)
        k = 0
        for r in rows:
            k += int(self.ks[r]) + 2 * int(np.bitwise_count(acc_z & self.xs[r]).sum() & 1)
            acc_x ^= self.xs[r]
            acc_z ^= self.zs[r]
        return acc_x, acc_z, k % 4

    def _solve(self, p_x: np.ndarray, p_z: np.ndarray) -> np.ndarray | None:
        """Rows whose product has the bits of p, or None if p is not in the group."""
        if self.dxs is not None and self.is_pure:
            return np.flatnonzero(self._anticommuting(self.dxs, self.dzs, p_x, p_z))
        r = self.rank
        if r == 0:
            return None if (p_x.any() or p_z.any()) else np.zeros(0, np.int64)
        m = self.bit_matrix().T.astype(np.uint8)  # (2n, r)
        target = np.concatenate([unpack_bits(p_x, self.n), unpack_bits(p_z, self.n)])
        sol = gf2_solve(m, target)
        return None if sol is None else np.flatnonzero(sol)

    def expectation(self, p: PauliOperator) -> int:
        """<p> on the (possibly mixed) stabilizer state: +1, -1 or 0."""
        if not p.is_hermitian:
            raise TableauError("expectation needs a Hermitian Pauli")
        p_x, p_z = self._packed(p)
        if self.rank and np.any(self._anticommuting(self.xs, self.zs, p_x, p_z)):
            return 0
        rows = self._solve(p_x, p_z)
        if rows is None:
            return 0
        acc_x, acc_z, k = self._row_product(rows)
        if not (np.array_equal(acc_x, p_x) and np.array_equal(acc_z, p_z)):
            return 0
        diff = (p.k - k) % 4
        if diff == 0:
            return 1
        if diff == 2:
            return -1
        raise TableauError("phase inconsistency in stabilizer group")

    def contains(self, p: PauliOperator) -> bool:
        return self.expectation(p) == 1

    def expectations(self, paulis: list[PauliOperator]) -> np.ndarray:
        """Vectorized :meth:`expectation` for many operators (pure states only)."""
        if not paulis:
            return np.zeros(0, np.int64)
        if not (self.is_pure and self.dxs is not None):
            return np.array([self.expectation(p) for p in paulis])
        px = pack_bits(np.stack([p.x for p in paulis]), self.n)
        pz = pack_bits(np.stack([p.z for p in paulis]), self.n)
        anti_s = _anticommute_matrix(px, pz, self.xs, self.zs)
        anti_d = _anticommute_matrix(px, pz, self.dxs, self.dzs)
        out = np.zeros(len(paulis), np.int64)
        for i, p in enumerate(paulis):
            if anti_s[i].any():
                continue
            acc_x, acc_z, k = self._row_product(np.flatnonzero(anti_d[i]))
            if not (np.array_equal(acc_x, px[i]) and np.array_equal(acc_z, pz[i])):
                raise TableauError("destabilizer decomposition failed")
            diff = (p.k - k) % 4
            out[i] = 1 if diff == 0 else -1 if diff == 2 else 0
            if diff % 2:
                raise TableauError("phase inconsistency in stabilizer group")
        return out

    # -- updates ---------------------------------------------------------------

    def _multiply_rows_into(self, targets: np.ndarray, src: int) -> None:
        """rows[t] <- rows[t] * rows[src] for stabilizer rows t."""
        if targets.size == 0:
            return
        sx, sz, sk = self.xs[src], self.zs[src], self.ks[src]
        cross = _parity(self.zs[targets] & sx)
        self.ks[targets] = (self.ks[targets] + sk + 2 * cross) % 4
        self.xs[targets] ^= sx
        self.zs[targets] ^= sz

    def measure(
        self,
        p: PauliOperator,
        forced_outcome: int | None = None,
        rng: np.random.Generator | None = None,
        log: bool = True,
    ) -> MeasurementResult:
        if not p.is_hermitian:
            raise TableauError("can only measure Hermitian Paulis (phase +1 or -1)")
        p_x, p_z = self._packed(p)
        anti = np.flatnonzero(self._anticommuting(self.xs, self.zs, p_x, p_z)) if self.rank else np.zeros(0, int)
        if anti.size:
            outcome = _draw(forced_outcome, rng)
            pivot = int(anti[0])
            self._multiply_rows_into(anti[1:], pivot)
            if self.dxs is not None:
                d_anti = np.flatnonzero(self._anticommuting(self.dxs, self.dzs, p_x, p_z))
                d_anti = d_anti[d_anti != pivot]
                if d_anti.size:
                    self.dxs[d_anti] ^= self.xs[pivot]
                    self.dzs[d_anti] ^= self.zs[pivot]
                self.dxs[pivot] = self.xs[pivot]
                self.dzs[pivot] = self.zs[pivot]
            self.xs[pivot] = p_x
            self.zs[pivot] = p_z
            self.ks[pivot] = (p.k + 2 * outcome) % 4
            result = MeasurementResult(outcome, False, Fraction(1, 2))
        else:
            value = self.expectation(p)
            if value == 0:
                # Independent of a rank-deficient group: uniform over the code space.
                outcome = _draw(forced_outcome, rng)
                self.xs = np.vstack([self.xs, p_x[None, :]])
                self.zs = np.vstack([self.zs, p_z[None, :]])
                self.ks = np.append(self.ks, (p.k + 2 * outcome) % 4)
                self.dxs = self.dzs = None
                result = MeasurementResult(outcome, False, Fraction(1, 2))
            else:
                outcome = 0 if value == 1 else 1
                if forced_outcome is not None and forced_outcome != outcome:
                    raise TableauError(
                        f"forced outcome {forced_outcome} contradicts deterministic outcome {outcome}"
                    )
                result = MeasurementResult(outcome, True, Fraction(1))
        if log and self.history is not None:
            self.history.append(("measure", p.copy(), result.outcome))
        return result

    def apply_table(self, table, targets: list[int]) -> None:
        """Conjugate all rows by a Clifford given as a conjugation table."""
        m = len(targets)
        for rows_x, rows_z, ks in ((self.xs, self.zs, self.ks), (self.dxs, self.dzs, None)):
            if rows_x is None or rows_x.shape[0] == 0:
                continue
            bits = [_get_bit(rows_x, q) for q in targets] + [_get_bit(rows_z, q) for q in targets]
            index = np.zeros(rows_x.shape[0], np.int64)
            for b in bits:
                index = (index << 1) | b
            k_add = np.array([t[0] for t in table], dtype=np.int64)[index]
            new_bits = np.array([t[1] for t in table], dtype=np.uint8)[index]
            for j, q in enumerate(targets):
                _set_bit(rows_x, q, new_bits[:, j])
                _set_bit(rows_z, q, new_bits[:, m + j])
            if ks is not None:
                ks += k_add
                ks %= 4

    def _compute_destabilizers(self) -> None:
        m = self.bit_matrix()  # rows are stabilizers (x | z)
        n = self.n
        # Symplectic products <s_i, d> = s_i.x . d.z + s_i.z . d.x; swap halves of s.
        sw = np.concatenate([m[:, n:], m[:, :n]], axis=1)
        d = gf2_right_inverse(sw)  # (2n, n): sw @ d = I
        if d is None:
            raise TableauError("stabilizers are not independent")
        d = d.T.copy()  # rows are destabilizers (x | z)
        for j in range(n):
            for i in range(j):
                if _symp(d[j], d[i], n):
                    d[j] ^= m[i]
        self.dxs = pack_bits(d[:, :n], n)
        self.dzs = pack_bits(d[:, n:], n)

    def memory_bytes(self) -> int:
        total = self.xs.nbytes + self.zs.nbytes + self.ks.nbytes
        if self.dxs is not None:
            total += self.dxs.nbytes + self.dzs.nbytes
        return total


def _symp(a: np.ndarray, b: np.ndarray, n: int) -> int:
    return int((np.dot(a[:n], b[n:]) + np.dot(a[n:], b[:n])) & 1)


def _row_ny(xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
    if xs.shape[0] == 0:
        return np.zeros(0, np.int64)
    return np.bitwise_count(xs & zs).sum(axis=1).astype(np.int64)


def _anticommute_matrix(ax, az, bx, bz) -> np.ndarray:
    """(len a, len b) 0/1 matrix of symplectic products on packed rows."""
    out = np.empty((ax.shape[0], bx.shape[0]), np.uint8)
    if out.size == 0:
        return out
    # only words where some a-row is nonzero contribute; local Paulis touch few
    cols = np.flatnonzero(np.any(ax | az, axis=0))
    if cols.size < ax.shape[1]:
        ax, az, bx, bz = ax[:, cols], az[:, cols], bx[:, cols], bz[:, cols]
    chunk = max(1, (1 << 22) // max(1, bx.size))
    for s in range(0, ax.shape[0], chunk):
        t = (ax[s : s + chunk, None, :] & bz[None]) ^ (az[s : s + chunk, None, :] & bx[None])
        out[s : s + chunk] = np.bitwise_count(t).sum(axis=2, dtype=np.int64) & 1
    return out


def _draw(forced: int | None, rng: np.random.Generator | None) -> int:
    # a forced outcome still consumes its draw so replays stay stream-aligned
    u = None if rng is None else int(rng.integers(2))
    if forced is not None:
        if forced not in (0, 1):
            raise TableauError("forced outcome must be 0 or 1")
        return forced
    if rng is None:
        raise TableauError("random measurement needs an rng or a forced outcome")
    return u


# -- GF(2) linear algebra ---------------------------------------------------


def gf2_rank(m: np.ndarray) -> int:
    a = (np.asarray(m, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = np.flatnonzero(a[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.flatnonzero(a[:, c])
        hit = hit[hit != r]
        a[hit] ^= a[r]
        r += 1
    return r


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve a @ x = b over GF(2); returns one solution or None."""
    a = np.asarray(a, dtype=np.uint8) & 1
    rows, cols = a.shape
    aug = np.concatenate([a, (np.asarray(b, np.uint8) & 1).reshape(-1, 1)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = np.flatnonzero(aug[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        hit = np.flatnonzero(aug[:, c])
        hit = hit[hit != r]
        aug[hit] ^= aug[r]
        pivots.append(c)
        r += 1
    if np.any(aug[r:, -1]):
        return None
    x = np.zeros(cols, np.uint8)
    for i, c in enumerate(pivots):
        x[c] = aug[i, -1]
    return x


def gf2_right_inverse(a: np.ndarray) -> np.ndarray | None:
    """D with a @ D = I (a has full row rank), else None."""
    a = np.asarray(a, dtype=np.uint8) & 1
    rows, cols = a.shape
    # Solve a^T-side system by eliminating [a | I]^T style: columns of D solve a d = e_i.
    aug = np.concatenate([a, np.eye(rows, dtype=np.uint8)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = np.flatnonzero(aug[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        hit = np.flatnonzero(aug[:, c])
        hit = hit[hit != r]
        aug[hit] ^= aug[r]
        pivots.append(c)
        r += 1
    if r < rows:
        return None
    d = np.zeros((cols, rows), np.uint8)
    for i, c in enumerate(pivots):
        d[c] = aug[i, cols:]
    return d


# -- module-level operations -------------------------------------------------


def measure_pauli(
    state: StabilizerState,
    p: PauliOperator,
    forced_outcome: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[StabilizerState, MeasurementResult]:
    """Measure ``p``; updates ``state`` in place and returns it with the result."""
    result = state.measure(p, forced_outcome, rng)
    return state, result


def project_code_space(
    state: StabilizerState, checks: list[PauliOperator], log: bool = True
) -> tuple[StabilizerState, Fraction]:
    """Force every check to +1 in turn.

    Returns the projected state and the product of branch probabilities;
    a zero probability means the code space is orthogonal to the state (the
    state is then left partially updated and should be discarded).
    """
    for i, a in enumerate(checks):
        for b in checks[i + 1 :]:
            if not a.commutes(b):
                raise TableauError("checks must commute")
    prob = Fraction(1)
    for c in checks:
        value = state.expectation(c)
        if value == -1:
            return state, Fraction(0)
        result = state.measure(c, forced_outcome=0, log=log)
        prob *= result.probability
    return state, prob


def canonical_form(state: StabilizerState) -> StabilizerState:
    """Reduced row-echelon generating set; equal groups give equal results."""
    n = state.n
    m = state.bit_matrix().astype(np.uint8)
    ks = state.ks.copy()
    rows = m.shape[0]
    r = 0
    for c in range(2 * n):
        if r == rows:
            break
        piv = np.flatnonzero(m[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
            ks[[r, p]] = ks[[p, r]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != r]
        if hit.size:
            cross = (m[hit, n:].astype(np.int64) @ m[r, :n].astype(np.int64)) & 1
            ks[hit] = (ks[hit] + ks[r] + 2 * cross) % 4
            m[hit] ^= m[r]
        r += 1
    return StabilizerState(n, pack_bits(m[:, :n], n), pack_bits(m[:, n:], n), ks)


def same_group(a: StabilizerState, b: StabilizerState) -> bool:
    return canonical_form(a) == canonical_form(b)


def apply_clifford(
    state: StabilizerState, gate: str | np.ndarray, targets: int | list[int]
) -> StabilizerState:
    """Conjugate every generator by a named gate or by an explicit Clifford matrix.

    Named gates: I, X, Y, Z, H, S, SDG (one target) and CZ, CNOT (two
    targets, control first).
    """
    targets = [targets] if isinstance(targets, (int, np.integer)) else [int(t) for t in targets]
    for t in targets:
        if not 0 <= t < state.n:
            raise TableauError(f"target {t} out of range for n={state.n}")
    if len(set(targets)) != len(targets):
        raise TableauError("repeated target")
    if isinstance(gate, str):
        name = gate.upper()
        if name not in GATE_MATRICES:
            raise TableauError(f"unknown gate {gate!r}")
        u = GATE_MATRICES[name]
    else:
        name = "U"
        u = np.asarray(gate, dtype=complex)
    m = len(targets)
    if u.shape != (2**m, 2**m):
        raise TableauError(f"gate acts on {int(np.log2(u.shape[0]))} qubits, got {m} targets")
    table = _table_from_key(np.ascontiguousarray(u).tobytes(), m)
    state.apply_table(table, targets)
    if state.history is not None:
        state.history.append(("unitary", u.copy(), tuple(targets)))
    return state
