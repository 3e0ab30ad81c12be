import numpy as np
import pytest

from cvdistill import fock

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(rng, d, rank=None):
    rank = rank or d
    m = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def random_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def dense_covariance(rho, d):
    """Quadrature-product covariance in a padded box, independent of ladder moments."""
    e = d + 2
    t = np.zeros((e, e, e, e), complex)
    t[:d, :d, :d, :d] = rho.reshape(d, d, d, d)
    big = t.reshape(e * e, e * e)
    x, p = fock.quadratures(e)
    eye = np.eye(e)
    ops = [np.kron(x, eye), np.kron(p, eye), np.kron(eye, x), np.kron(eye, p)]
    first = np.array([np.trace(big @ o).real for o in ops])
    second = np.array([[np.trace(big @ (a @ b + b @ a) / 2).real for b in ops] for a in ops])
    return second - np.outer(first, first)
