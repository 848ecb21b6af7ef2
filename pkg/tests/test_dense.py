import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmdb_mbqc import spin
from cmdb_mbqc.dense import (
    DenseCapExceeded,
    DenseState,
    apply_kraus,
    build_aklt,
    fidelity,
    hamiltonian_apply,
    povm_kraus,
    povm_kraus_spin32,
)
from cmdb_mbqc.lattice import LatticeSpec, build_map
from conftest import pauli_ops


@pytest.mark.parametrize("s", [0.5, 1, 1.5])
def test_spin_algebra(s):
    sx, sy, sz = spin.spin_matrices(s)
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz)
    cas = sx @ sx + sy @ sy + sz @ sz
    assert np.allclose(cas, s * (s + 1) * np.eye(len(sz)))


@pytest.mark.parametrize("s1,s2", [(1.5, 1.5), (1.5, 0.5), (1, 1)])
def test_projectors_two_ways(s1, s2):
    total = 0
    for s in spin.allowed_total_spins(s1, s2):
        p = spin.total_spin_projector(s1, s2, s)
        assert np.allclose(p, spin.total_spin_projector_poly(s1, s2, s), atol=1e-12)
        assert np.allclose(p @ p, p, atol=1e-12)
        total = total + p
    assert np.allclose(total, np.eye(total.shape[0]))


def test_clebsch_gordan_known_values():
    assert spin.clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / np.sqrt(2))
    assert spin.clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == pytest.approx(-1 / np.sqrt(2))
    assert spin.clebsch_gordan(1, 1, 1, -1, 2, 0) == pytest.approx(1 / np.sqrt(6))


def test_isometry_carries_spin():
    v = spin.symmetric_isometry()
    assert np.allclose(v.T @ v, np.eye(4))
    s12 = spin.spin_matrices(0.5)
    s32 = spin.spin_matrices(1.5)
    eye = np.eye(2)
    for a in range(3):
        sa = s12[a]
        total = np.kron(np.kron(sa, eye), eye) + np.kron(np.kron(eye, sa), eye) + np.kron(np.kron(eye, eye), sa)
        assert np.allclose(v.T @ total @ v, s32[a])


@pytest.mark.parametrize("axis", "xyz")
def test_kraus_forms_agree(axis):
    assert np.allclose(povm_kraus(axis), povm_kraus_spin32(axis), atol=1e-12)


def test_povm_completeness_on_symmetric_space():
    v = spin.symmetric_isometry()
    total = sum(spin.spin32_povm_element(a).conj().T @ spin.spin32_povm_element(a) for a in "xyz")
    assert np.allclose(total, np.eye(4))
    assert np.allclose(sum(povm_kraus(a).conj().T @ povm_kraus(a) for a in "xyz"), v @ v.T)


@pytest.mark.parametrize("n_sites", [1, 2, 3])
def test_aklt_ground_state(n_sites):
    spec = LatticeSpec(sites_per_chain=n_sites)
    psi = build_aklt(spec)
    assert psi.norm == pytest.approx(1)
    assert hamiltonian_apply(spec, psi).norm < 1e-10


def test_random_symmetric_state_is_not_a_ground_state():
    spec = LatticeSpec(sites_per_chain=2)
    m = build_map(spec)
    rng = np.random.default_rng(3)
    psi = DenseState(m.n_qubits, rng.normal(size=2**m.n_qubits) + 0j)
    for s in m.a_sites:
        psi = psi.apply(spin.symmetric_projector(), s.qubits)
    assert hamiltonian_apply(spec, psi.normalized()).norm > 1e-2


def test_merge_unitary_is_permutation():
    u = spin.merge_unitary()
    assert np.allclose(u @ u.T, np.eye(4))
    assert sorted(np.argmax(u, axis=0).tolist()) == [0, 1, 2, 3]


def test_cap_enforced():
    with pytest.raises(DenseCapExceeded):
        DenseState.zeros(30, cap=22)


def test_dump_load_roundtrip():
    psi = build_aklt(LatticeSpec(sites_per_chain=1))
    back, ids = DenseState.load(psi.dump())
    assert ids == list(range(psi.n))
    assert np.array_equal(back.amplitudes, psi.amplitudes)


@given(pauli_ops(3))
def test_apply_pauli_matches_matrix(p):
    rng = np.random.default_rng(7)
    amp = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = DenseState(3, amp)
    assert np.allclose(psi.apply_pauli(p).amplitudes, p.to_matrix() @ amp)


def test_kraus_probabilities_sum_to_one():
    psi = build_aklt(LatticeSpec(sites_per_chain=2))
    site = build_map(LatticeSpec(sites_per_chain=2)).site(0, 0).qubits
    total = sum(apply_kraus(psi, site, a)[1] for a in "xyz")
    assert total == pytest.approx(1, abs=1e-12)


def test_fidelity_phase_blind():
    psi = build_aklt(LatticeSpec(sites_per_chain=1))
    assert fidelity(psi, DenseState(psi.n, 1j * psi.amplitudes)) == pytest.approx(1)
