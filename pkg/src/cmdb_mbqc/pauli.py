"""Signed n-qubit Pauli strings.

Internally a Pauli is stored as ``i**k * X**x Z**z`` (X before Z on every
qubit).  In that ordering the product rule is a single dot product:

    (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^(z1.x2) X^(x1+x2) Z^(z1+z2)

The conventional phase (with Y written as Y, not as iXZ) is recovered as
``k - #Y``.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np

_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"+": 0, "": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1), "_": (0, 0)}
_BITS_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class PauliOperator:
    """A Pauli string with a phase in {+1, -1, +i, -i}."""

    __slots__ = ("x", "z", "k")

    def __init__(self, x, z, k: int = 0):
        self.x = np.asarray(x, dtype=np.uint8).copy()
        self.z = np.asarray(z, dtype=np.uint8).copy()
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise ValueError("x and z must be 1-d bit vectors of equal length")
        self.k = int(k) % 4

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_label(cls, label: str) -> PauliOperator:
        """Parse strings such as ``"-XZZ"``, ``"+iYI"`` or ``"XX"``."""
        label = label.strip()
        i = 0
        while i < len(label) and label[i] in "+-i":
            i += 1
        prefix, body = label[:i], label[i:]
        if prefix not in _PREFIX_PHASE:
            raise ValueError(f"bad phase prefix {prefix!r}")
        try:
            bits = [_LETTER_BITS[c] for c in body.upper()]
        except KeyError as exc:
            raise ValueError(f"bad Pauli letter in {label!r}") from exc
        x = np.array([b[0] for b in bits], dtype=np.uint8)
        z = np.array([b[1] for b in bits], dtype=np.uint8)
        n_y = int(np.sum(x & z))
        return cls(x, z, _PREFIX_PHASE[prefix] + n_y)

    @classmethod
    def from_sparse(cls, n: int, ops: Mapping[int, str], sign: int = 1) -> PauliOperator:
        """Build from ``{qubit: letter}``; ``sign`` is +1 or -1."""
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        for q, letter in ops.items():
            if not 0 <= q < n:
                raise IndexError(f"qubit {q} out of range for n={n}")
            x[q], z[q] = _LETTER_BITS[letter.upper()]
        n_y = int(np.sum(x & z))
        return cls(x, z, (0 if sign > 0 else 2) + n_y)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliOperator:
        return cls.from_sparse(n, {qubit: letter})

    # -- basic properties ---------------------------------------------

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def std_phase(self) -> int:
        """Exponent e with the operator equal to i**e times a product of I, X, Y, Z."""
        return (self.k - int(np.sum(self.x & self.z))) % 4

    @property
    def phase(self) -> complex:
        return 1j ** self.std_phase

    @property
    def is_hermitian(self) -> bool:
        return self.std_phase in (0, 2)

    @property
    def sign(self) -> int:
        e = self.std_phase
        if e not in (0, 2):
            raise ValueError("non-Hermitian Pauli has no real sign")
        return 1 if e == 0 else -1

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def letters(self) -> str:
        return "".join(_BITS_LETTER[(int(a), int(b))] for a, b in zip(self.x, self.z))

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.std_phase] + self.letters()

    def __repr__(self) -> str:
        return f"PauliOperator({str(self)!r})"

    def sparse_label(self) -> str:
        """Compact form like ``-X3 Z7``; handy for large registers."""
        parts = [f"{_BITS_LETTER[(int(self.x[q]), int(self.z[q]))]}{q}" for q in self.support()]
        return _PHASE_PREFIX[self.std_phase] + (" ".join(parts) if parts else "I")

    # -- algebra ------------------------------------------------------

    def copy(self) -> PauliOperator:
        return PauliOperator(self.x, self.z, self.k)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        k = self.k + other.k + 2 * int(np.dot(self.z, other.x) & 1)
        return PauliOperator(self.x ^ other.x, self.z ^ other.z, k)

    def __neg__(self) -> PauliOperator:
        return PauliOperator(self.x, self.z, self.k + 2)

    def times_phase(self, power_of_i: int) -> PauliOperator:
        return PauliOperator(self.x, self.z, self.k + power_of_i)

    def inverse(self) -> PauliOperator:
        # (i^k X^x Z^z)^2 = i^(2k) (-1)^(x.z)
        xz = int(np.sum(self.x & self.z))
        return PauliOperator(self.x, self.z, -self.k - 2 * xz)

    def commutes(self, other: PauliOperator) -> bool:
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return (int(np.dot(self.x, other.z)) + int(np.dot(self.z, other.x))) % 2 == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.k, self.x.tobytes(), self.z.tobytes()))

    def same_up_to_phase(self, other: PauliOperator) -> bool:
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def restrict(self, qubits: Iterable[int]) -> PauliOperator:
        """Same-length operator keeping only the factors on ``qubits`` (phase dropped)."""
        mask = np.zeros(self.n, np.uint8)
        mask[list(qubits)] = 1
        return PauliOperator(self.x & mask, self.z & mask, 0)

    def embed(self, n: int, qubits: Iterable[int]) -> PauliOperator:
        """Place this operator onto ``qubits`` of an ``n``-qubit register."""
        qubits = list(qubits)
        if len(qubits) != self.n:
            raise ValueError("qubit list does not match operator length")
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        x[qubits] = self.x
        z[qubits] = self.z
        return PauliOperator(x, z, self.k)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; qubit 0 is the most significant bit."""
        mat = np.array([[1.0 + 0j]])
        for a, b in zip(self.x, self.z):
            f = _I2
            if a:
                f = _X
            if b:
                f = f @ _Z
            mat = np.kron(mat, f)
        return (1j ** self.k) * mat


def pauli_product(paulis: Iterable[PauliOperator], n: int | None = None) -> PauliOperator:
    acc = None
    for p in paulis:
        acc = p.copy() if acc is None else acc * p
    if acc is None:
        if n is None:
            raise ValueError("empty product needs n")
        return PauliOperator.identity(n)
    return acc


def symplectic_inner(p: PauliOperator, q: PauliOperator) -> int:
    return 0 if p.commutes(q) else 1
