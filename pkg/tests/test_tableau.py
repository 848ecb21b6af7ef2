from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmdb_mbqc.dense import DenseState, fidelity, tableau_to_dense
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.tableau import (
    GATE_MATRICES,
    StabilizerState,
    TableauError,
    apply_clifford,
    canonical_form,
    clifford_table,
    gf2_rank,
    gf2_solve,
    measure_pauli,
    pack_bits,
    project_code_space,
    same_group,
    unpack_bits,
)
from conftest import hermitian, pauli_ops

N = 4
gate_steps = st.one_of(
    st.tuples(st.sampled_from(["H", "S", "SDG", "X", "Y", "Z"]), st.integers(0, N - 1)),
    st.tuples(st.sampled_from(["CZ", "CNOT"]), st.integers(0, N - 1), st.integers(0, N - 1)).filter(
        lambda t: t[1] != t[2]
    ),
)


def run_circuit(steps):
    state = StabilizerState.zero_state(N)
    psi = DenseState.zeros(N)
    for name, *qs in steps:
        apply_clifford(state, name, qs)
        psi = psi.apply(GATE_MATRICES[name], qs)
    return state, psi


@given(st.lists(gate_steps, max_size=25))
def test_circuit_matches_dense(steps):
    state, psi = run_circuit(steps)
    state.check_invariants()
    assert fidelity(tableau_to_dense(state), psi) == pytest.approx(1, abs=1e-12)


@given(st.lists(gate_steps, max_size=20), pauli_ops(N), st.integers(0, 1))
def test_measurement_matches_dense(steps, p, outcome):
    p = hermitian(p)
    if p.weight() == 0:
        return
    state, psi = run_circuit(steps)
    dense_p = psi.project_pauli(p, outcome).norm ** 2
    value = state.expectation(p)
    assert value == pytest.approx(psi.expectation(p).real, abs=1e-12)
    if dense_p < 1e-12:
        with pytest.raises(TableauError):
            state.measure(p, forced_outcome=outcome)
        return
    res = state.measure(p, forced_outcome=outcome)
    assert float(res.probability) == pytest.approx(dense_p, abs=1e-12)
    assert res.deterministic == (value != 0)
    state.check_invariants()
    post = psi.project_pauli(p, outcome).normalized()
    assert fidelity(tableau_to_dense(state), post) == pytest.approx(1, abs=1e-12)


@given(st.lists(gate_steps, max_size=20))
def test_vectorized_expectations(steps):
    state, _ = run_circuit(steps)
    ops = [PauliOperator.from_label(s) for s in ("ZIII", "XXII", "IYZI", "ZZZZ", "XIIX", "YYYY")]
    assert state.expectations(ops).tolist() == [state.expectation(p) for p in ops]


@given(st.lists(gate_steps, max_size=20), st.lists(st.integers(0, N - 1), min_size=N, max_size=N))
def test_canonical_form_ignores_generator_choice(steps, mix):
    state, _ = run_circuit(steps)
    gens = state.generators
    # unit upper-triangular mixing keeps the generators independent
    mixed = [g * gens[j] if j > i else g for i, (g, j) in enumerate(zip(gens, mix))]
    other = StabilizerState.from_generators(mixed, n=N)
    assert canonical_form(other) == canonical_form(state)
    assert same_group(other, state)


def test_clifford_table_matches_conjugation():
    u = GATE_MATRICES["CNOT"]
    table = clifford_table(u, 2)
    for label in ["XI", "IX", "ZI", "IZ", "YY"]:
        p = PauliOperator.from_label(label)
        img = u @ p.to_matrix() @ u.conj().T
        conj = StabilizerState.from_generators([p], n=2, check=False)
        conj.apply_table(table, [0, 1])
        assert np.allclose(conj.generator(0).to_matrix(), img)


def test_zero_state_expectations():
    s = StabilizerState.zero_state(3)
    assert s.expectation(PauliOperator.from_label("ZII")) == 1
    assert s.expectation(PauliOperator.from_label("-IZI")) == -1
    assert s.expectation(PauliOperator.from_label("XII")) == 0


def test_forced_against_deterministic_raises():
    s = StabilizerState.zero_state(2)
    with pytest.raises(TableauError):
        s.measure(PauliOperator.from_label("ZI"), forced_outcome=1)


def test_random_measurement_needs_rng():
    s = StabilizerState.zero_state(1)
    with pytest.raises(TableauError):
        s.measure(PauliOperator.from_label("X"))


def test_measure_pauli_probability(rng):
    s = StabilizerState.zero_state(2)
    s, res = measure_pauli(s, PauliOperator.from_label("XX"), rng=rng)
    assert res.probability == Fraction(1, 2)
    assert s.expectation(PauliOperator.from_label("XX")) == res.eigenvalue


def test_mixed_state_projection():
    # rank-1 group on 3 qubits, then project onto a commuting code space
    s = StabilizerState.from_generators(["ZZI"], n=3)
    assert s.rank == 1 and not s.is_pure
    s, p = project_code_space(s, [PauliOperator.from_label("IZZ"), PauliOperator.from_label("XXX")])
    assert s.rank == 3
    assert p == Fraction(1, 4)  # each check is unbiased on the mixed state
    s2 = StabilizerState.from_generators(["ZZI"], n=3)
    _, p0 = project_code_space(s2, [PauliOperator.from_label("-ZZI")])
    assert p0 == 0


def test_apply_clifford_validation():
    s = StabilizerState.zero_state(2)
    with pytest.raises((TableauError, ValueError)):
        apply_clifford(s, "CZ", [0, 0])
    with pytest.raises((TableauError, ValueError)):
        apply_clifford(s, "H", [5])


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_pack_roundtrip(bits):
    arr = np.array(bits, np.uint8)
    assert unpack_bits(pack_bits(arr, len(arr)), len(arr)).tolist() == bits


@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_gf2_solve(rows, cols, data):
    a = np.array(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=cols, max_size=cols), min_size=rows, max_size=rows)), np.uint8)
    x = np.array(data.draw(st.lists(st.integers(0, 1), min_size=cols, max_size=cols)), np.uint8)
    b = (a @ x) % 2
    sol = gf2_solve(a, b)
    assert sol is not None
    assert np.array_equal((a @ sol) % 2, b)
    assert gf2_rank(a) <= min(rows, cols)


def test_memory_is_quadratic():
    small = StabilizerState.zero_state(256).memory_bytes()
    big = StabilizerState.zero_state(1024).memory_bytes()
    assert 12 < big / small < 20
