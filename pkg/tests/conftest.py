import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from cmdb_mbqc.pauli import PauliOperator

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def pauli_ops(n):
    return st.builds(
        lambda xs, zs, k: PauliOperator(np.array(xs, np.uint8), np.array(zs, np.uint8), k),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.integers(0, 3),
    )


def hermitian(p):
    """Fix the phase so p is Hermitian with sign +1."""
    return PauliOperator(p.x, p.z, int(np.sum(p.x & p.z)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(tag: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
