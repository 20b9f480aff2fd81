import numpy as np
import pytest

from spingraph.graph import complete_graph, star_graph

K4_SEED = 1


def k4_lengths(seed: int = K4_SEED) -> np.ndarray:
    """Incommensurate lengths within 10% of pi/3."""
    rng = np.random.default_rng(seed)
    return np.pi / 3 * (1 + 0.2 * (rng.random(6) - 0.5))


@pytest.fixture
def k4():
    return complete_graph(4, k4_lengths())


@pytest.fixture
def star3():
    return star_graph([1.0, 1.3247, 0.8713])


def random_self_adjoint_pair(rng: np.random.Generator, n: int):
    """Random valid matching pair A = G i(V - I), B = G (V + I).

    V is a Haar unitary and G a generic invertible matrix; A B^dagger is then
    Hermitian and (A, B) has full rank.
    """
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    V = Q * (np.diag(R) / np.abs(np.diag(R)))
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return G @ (1j * (V - np.eye(n))), G @ (V + np.eye(n))


ACCEPTANCE_REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)
