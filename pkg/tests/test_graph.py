import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import kstest

from spingraph.graph import (
    DirectedBond, GraphError, build_graph, complete_graph, edge_unit_vector, from_edges,
    single_edge, total_length,
)
from spingraph.lattice import build_diamond_chain
from spingraph.su2 import haar_su2, is_su2, semicircle_cdf, su2_inverse, SU2_TOL


def test_single_edge_has_two_bonds():
    g = build_graph({"vertices": [{"id": "v"}, {"id": "w"}],
                     "edges": [{"from": "v", "to": "w", "length": 1.0}]})
    assert g.n_bonds == 2
    assert g.origin(0) == g.terminus(1) == 0


def test_k4_counts():
    g = complete_graph(4, [1.0] * 6)
    assert (g.n_edges, g.n_bonds) == (6, 12)
    assert all(g.degree(v) == 3 for v in range(4))


@pytest.mark.parametrize("L", [0.0, -1.0, np.nan])
def test_bad_length(L):
    with pytest.raises(GraphError):
        from_edges([(0, 1, L)])


def test_disconnected_rejected():
    with pytest.raises(GraphError):
        from_edges([(0, 1, 1.0), (2, 3, 1.0)])


def test_total_length():
    assert total_length(single_edge(1.0)) == 1.0
    assert np.isclose(total_length(complete_graph(4, [np.pi / 3] * 6)), 2 * np.pi)
    chain = build_diamond_chain(7, 0.5)
    assert np.isclose(total_length(chain.graph), 4 * 7 * 0.5)


def test_unit_vectors():
    g = from_edges([(0, 1, 2.0), (0, 2, np.sqrt(2))], positions={0: (0, 0), 1: (2, 0), 2: (1, 1)})
    assert np.allclose(edge_unit_vector(g, 0), [1, 0])
    assert np.allclose(edge_unit_vector(g, 2), [1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert np.allclose(edge_unit_vector(g, DirectedBond(0, True)), [-1, 0])


def test_embedding_needed_for_direction():
    g = from_edges([(0, 1, 1.0)])
    with pytest.raises(GraphError):
        edge_unit_vector(g, 0)


@given(st.integers(0, 11), st.booleans())
def test_reversal_involution(e, rev):
    g = complete_graph(4, [1.0] * 6)
    b = DirectedBond(e % g.n_edges, rev)
    assert b.reversed().reversed() == b
    assert g.origin(b.index) == g.terminus(b.reversed().index)


@settings(max_examples=30)
@given(st.permutations(range(6)), st.lists(st.floats(0.1, 5.0), min_size=6, max_size=6))
def test_total_length_relabel_invariant(perm, lengths):
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    relabel = {0: "c", 1: "a", 2: "d", 3: "b"}
    g1 = from_edges([(a, b, L) for (a, b), L in zip(pairs, lengths)])
    g2 = from_edges([(relabel[pairs[i][1]], relabel[pairs[i][0]], lengths[i]) for i in perm])
    assert np.isclose(total_length(g1), total_length(g2), rtol=1e-14)


def test_digest_stable():
    a = complete_graph(4, [1.0] * 6)
    b = complete_graph(4, [1.0] * 6)
    assert a.digest() == b.digest()
    assert a.digest() != complete_graph(4, [1.0] * 5 + [1.1]).digest()


# SU(2)

def test_haar_samples_valid():
    u = haar_su2(np.random.default_rng(0), 1000)
    assert all(is_su2(x) for x in u)


def test_haar_character_moments():
    u = haar_su2(np.random.default_rng(11), 10**6)
    tr = np.trace(u, axis1=1, axis2=2)
    assert abs(tr.mean()) < 0.01
    assert abs(np.mean(np.abs(tr) ** 2) - 1) < 0.01
    # tr(u)/2 has density (2/pi) sqrt(1 - x^2)
    assert kstest(tr.real / 2, semicircle_cdf).statistic < 0.01


def test_closure_tolerance_growth():
    rng = np.random.default_rng(3)
    u = np.eye(2, dtype=complex)
    for x in haar_su2(rng, 10**4):
        u = x @ u
    assert is_su2(u, tol=10 * SU2_TOL)
    assert is_su2(su2_inverse(u) @ u, tol=10 * SU2_TOL)
