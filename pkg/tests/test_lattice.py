import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spingraph.graph import single_edge
from spingraph.lattice import (
    LatticeError, LeadGraph, T3BandQuery, T3RegimeError, band_membership, build_diamond_chain,
    k_samples, localization_scan, mean_conductance, perturb_lengths, rashba_edge_rotation,
    t3_band_value, t3_flat_bands, t3_in_spectrum, transmission,
)
from spingraph.su2 import I2, is_su2

X_FLAT = 0.9553166181245093   # arccos(1/sqrt 3), the scalar oracle for cos^2 x = 1/3


def test_chain_geometry():
    c1 = build_diamond_chain(1)
    assert (c1.graph.n_edges, c1.graph.n_vertices, len(c1.leads)) == (4, 4, 2)
    assert build_diamond_chain(50).graph.n_edges == 200
    with pytest.raises(LatticeError):
        build_diamond_chain(0)


def test_edge_rotation_examples():
    e = (np.cos(0.3), np.sin(0.3))
    assert np.allclose(rashba_edge_rotation(1.0, 0.0, e), I2)
    assert np.allclose(rashba_edge_rotation(1.0, np.pi / 2, e), -I2)
    assert np.allclose(rashba_edge_rotation(0.5, np.pi, e, convention="hamiltonian"), -1j * np.array(
        [[0, e[1] + 1j * e[0]], [e[1] - 1j * e[0], 0]]))


@settings(max_examples=200)
@given(st.floats(0.01, 5), st.floats(-5, 5), st.floats(0, 2 * np.pi), st.sampled_from(["display", "hamiltonian"]))
def test_edge_rotation_su2_and_reversal(L, kR, phi, conv):
    e = np.array([np.cos(phi), np.sin(phi)])
    u = rashba_edge_rotation(L, kR, e, conv)
    assert is_su2(u)
    assert np.allclose(rashba_edge_rotation(L, kR, -e, conv), u.conj().T)


def test_t3_values():
    q = lambda E: T3BandQuery(E - (np.pi / 2) ** 2)
    assert t3_band_value(q(np.pi**2 / 9)) == pytest.approx(0.25)
    assert t3_band_value(q(np.pi**2)) == pytest.approx(1.0)
    assert not band_membership(0.25, True)
    assert band_membership(1 / 3, False)
    assert band_membership(1.0, True) and not band_membership(1.0, False)
    assert t3_in_spectrum(q(np.pi**2))
    with pytest.raises(T3RegimeError):
        t3_band_value(T3BandQuery(1.0, k_rashba=1.0))


def test_t3_neumann_display_agreement():
    E = np.linspace(0.01, 40, 10**4)
    kR = np.pi / 2
    for e in E:
        c2 = np.cos(np.sqrt(e + kR**2)) ** 2
        direct = (0 <= c2 <= 1 / 6) or (0.5 <= c2 <= 2 / 3) or c2 == 1 / 3 or c2 == 1.0 \
            or abs(np.sin(np.sqrt(e + kR**2))) <= 1e-12
        assert t3_in_spectrum(T3BandQuery(e)) == direct


def test_flat_bands():
    roots = t3_flat_bands(0.0, 0.0, 0.0, (0.0, (2 * np.pi) ** 2))
    assert np.sqrt(roots[0]) == pytest.approx(X_FLAT, abs=1e-9)
    assert roots[0] == pytest.approx(X_FLAT**2, abs=1e-9)
    assert len(roots) == 4     # two per period pi of sqrt(E)
    for E in roots:
        assert abs(t3_band_value(T3BandQuery(E, k_rashba=0.0, omega=np.pi / 2), "flat") - 1 / 3) < 1e-10
    lo, hi = np.arccos(np.sqrt(0.45)) ** 2, np.arccos(np.sqrt(0.4)) ** 2
    assert t3_flat_bands(0.0, 0.0, 0.0, (lo, hi)) == []
    with_coupling = t3_flat_bands(0.5, 0.3, 1.0, (0.1, 30.0))
    for E in with_coupling:
        assert abs(t3_band_value(T3BandQuery(E, 0.5, 0.3, 1.0, np.pi / 2), "flat") - 1 / 3) < 1e-10


def test_free_edge_transmits_both_spins():
    ch = LeadGraph(single_edge(1.0), (0, 1))
    for k in (0.3, 1.7, 4.0):
        r = transmission(ch, k)
        assert r.conductance == pytest.approx(2.0, abs=1e-12)
        assert r.unitarity_deficit < 1e-8


def test_chain_conducts_without_coupling():
    ch = build_diamond_chain(5)
    assert all(transmission(ch, k).conductance > 0.1 for k in (0.4, 1.1, 2.3))


def test_aharonov_bohm_cage():
    ch = build_diamond_chain(10)
    for k in (0.4, 1.1, 2.3):
        assert transmission(ch, k, flux=np.pi).conductance < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.05, 3.1), st.floats(0, 2))
def test_unitarity_and_lead_symmetry(seed, k, x):
    ch = perturb_lengths(build_diamond_chain(3), 0.05, np.random.default_rng(seed))
    r = transmission(ch, k, k_rashba=x * np.pi / 2)
    assert r.unitarity_deficit < 1e-8
    assert r.conductance == pytest.approx(r.reverse_conductance, abs=1e-9)


def test_small_scan_finds_rashba_cage():
    ch = build_diamond_chain(10)
    ks = k_samples(1.0, 20, np.random.default_rng(0))
    x = np.linspace(0, 2, 11)
    scan = localization_scan(ch, x * np.pi / 2, [0.0], ks)
    kr, flux, G = scan.minimum()
    assert kr == pytest.approx(np.pi / 2) and G < 1e-4
    assert scan.G_mean[0, 0] > 0.1
    assert mean_conductance(ch, np.pi / 2, 0.0, ks)[0] == pytest.approx(G)


def test_k_samples_range():
    ks = k_samples(2.0, 1000, np.random.default_rng(1))
    assert np.all((ks > 0) & (ks <= np.pi / 2)) and np.all(np.diff(ks) >= 0)
