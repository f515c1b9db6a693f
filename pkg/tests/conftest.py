import numpy as np
import pytest

from graphriccati.model import BlockOperator

_ACCEPTANCE = []


def record_acceptance(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
    if detail:
        line += f" -- {detail}"
    _ACCEPTANCE.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture
def sharp():
    """A0 = -1, A1 = 1, V = 1: the case where both estimates are equalities."""
    return BlockOperator([[-1.0]], [[1.0]], [[1.0]], 0.0)


@pytest.fixture
def touching():
    """A0 = A1 = 0, V = 1: spectra touch at lambda = 0."""
    return BlockOperator([[0.0]], [[0.0]], [[1.0]], 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n, scale=1.0):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (Z + Z.conj().T)


def random_complex(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
