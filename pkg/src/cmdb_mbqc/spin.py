"""Angular-momentum matrices, Clebsch-Gordan coefficients and total-spin projectors."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

import numpy as np


def spin_matrices(s: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_x, S_y, S_z) in the basis m = s, s-1, ..., -s."""
    dim = int(round(2 * s + 1))
    ms = s - np.arange(dim)
    sz = np.diag(ms).astype(complex)
    splus = np.zeros((dim, dim), dtype=complex)
    for i in range(1, dim):
        m = ms[i]
        splus[i - 1, i] = np.sqrt(s * (s + 1) - m * (m + 1))
    sminus = splus.conj().T
    return (splus + sminus) / 2, (splus - sminus) / 2j, sz


def _half_int(v) -> Fraction:
    f = Fraction(v).limit_denominator(2)
    if f.denominator not in (1, 2):
        raise ValueError(f"{v} is not a half-integer")
    return f


@lru_cache(maxsize=None)
def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """<j1 m1; j2 m2 | j m> by the Racah formula (Condon-Shortley phases)."""
    j1, m1, j2, m2, j, m = (_half_int(v) for v in (j1, m1, j2, m2, j, m))
    if m1 + m2 != m or not abs(j1 - j2) <= j <= j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0
    for v in (j1 + j2 + j, j1 - m1, j2 - m2, j - m):
        if v.denominator != 1:
            return 0.0

    def f(x: Fraction) -> int:
        return factorial(int(x))

    pref = (2 * j + 1) * f(j1 + j2 - j) * f(j1 - j2 + j) * f(-j1 + j2 + j) / f(j1 + j2 + j + 1)
    pref *= f(j + m) * f(j - m) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2)
    total = 0.0
    for k in range(0, int(j1 + j2 - j) + 1):
        terms = (
            j1 + j2 - j - k,
            j1 - m1 - k,
            j2 + m2 - k,
            j - j2 + m1 + k,
            j - j1 - m2 + k,
        )
        if any(t < 0 for t in terms):
            continue
        denom = f(Fraction(k))
        for t in terms:
            denom *= f(t)
        total += (-1) ** k / denom
    return float(sqrt(pref) * total)


def coupled_basis(s1: float, s2: float, s: float) -> np.ndarray:
    """Columns are |s, M> (M = s..-s) expanded in the product basis of s1 x s2."""
    d1, d2 = int(round(2 * s1 + 1)), int(round(2 * s2 + 1))
    ds = int(round(2 * s + 1))
    out = np.zeros((d1 * d2, ds))
    for a in range(d1):
        m1 = s1 - a
        for b in range(d2):
            m2 = s2 - b
            for c in range(ds):
                out[a * d2 + b, c] = clebsch_gordan(s1, m1, s2, m2, s, s - c)
    return out


def total_spin_projector(s1: float, s2: float, s: float) -> np.ndarray:
    """Projector onto total spin ``s`` of two spins, built from CG vectors."""
    v = coupled_basis(s1, s2, s)
    return (v @ v.T).astype(complex)


def total_spin_projector_poly(s1: float, s2: float, s: float) -> np.ndarray:
    """Same projector as a polynomial in S_1.S_2 (Lagrange interpolation)."""
    a = spin_matrices(s1)
    b = spin_matrices(s2)
    dot = sum(np.kron(a[i], b[i]) for i in range(3))
    eye = np.eye(dot.shape[0], dtype=complex)

    def eig(t: float) -> float:
        return (t * (t + 1) - s1 * (s1 + 1) - s2 * (s2 + 1)) / 2

    proj = eye.copy()
    t = abs(s1 - s2)
    while t <= s1 + s2 + 1e-9:
        if abs(t - s) > 1e-9:
            proj = proj @ (dot - eig(t) * eye) / (eig(s) - eig(t))
        t += 1
    return proj


def allowed_total_spins(s1: float, s2: float) -> list[float]:
    out = []
    t = abs(s1 - s2)
    while t <= s1 + s2 + 1e-9:
        out.append(t)
        t += 1
    return out


# Three virtual qubits <-> spin-3/2.  Qubit |0> is m = +1/2.
SQ3 = 1 / np.sqrt(3)


def symmetric_isometry() -> np.ndarray:
    """8 x 4 map from spin-3/2 (m = 3/2, 1/2, -1/2, -3/2) to three qubits."""
    v = np.zeros((8, 4))
    v[0b000, 0] = 1.0
    v[[0b001, 0b010, 0b100], 1] = SQ3
    v[[0b110, 0b101, 0b011], 2] = SQ3
    v[0b111, 3] = 1.0
    return v


def symmetric_projector() -> np.ndarray:
    v = symmetric_isometry()
    return (v @ v.T).astype(complex)


def merge_unitary() -> np.ndarray:
    """Pair of spin-1/2 (b1, b2) -> spin-3/2 with m = m1 + 2 m2.

    Row index is the spin-3/2 level (m = 3/2, 1/2, -1/2, -3/2); column index
    is 2 * bit(b1) + bit(b2) with bit 0 meaning m = +1/2.
    """
    u = np.zeros((4, 4))
    for b1 in (0, 1):
        for b2 in (0, 1):
            m1 = 0.5 - b1
            m2 = 0.5 - b2
            m = m1 + 2 * m2
            level = int(round(1.5 - m))
            u[level, 2 * b1 + b2] = 1.0
    return u.astype(complex)


def spin32_povm_element(axis: str) -> np.ndarray:
    """F_nu = (S_nu^2 - 1/4) / sqrt(6) on the spin-3/2 space."""
    sx, sy, sz = spin_matrices(1.5)
    s = {"x": sx, "y": sy, "z": sz}[axis]
    return (s @ s - 0.25 * np.eye(4)) / np.sqrt(6)
