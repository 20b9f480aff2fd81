"""Diamond chains, Rashba edge holonomy, T3 band conditions and lead transmission."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .graph import MetricGraph, build_graph, edge_unit_vector
from .operators import DIRICHLET, RashbaParams, laplace_neumann_pair, rashba_bond_rotation, rashba_sigma
from .su2 import I2, SIGMA_X, SIGMA_Y, expi_involution


class LatticeError(ValueError):
    pass


class T3RegimeError(LatticeError):
    pass


class TransmissionError(RuntimeError):
    pass


# edge holonomy

def cross_n_sigma(e) -> np.ndarray:
    """(sigma x n).e with n = z: sigma_y e_x - sigma_x e_y."""
    ex, ey = (float(x) for x in e)
    if abs(ex * ex + ey * ey - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return SIGMA_Y * ex - SIGMA_X * ey


def rashba_edge_rotation(L_e: float, k_rashba: float, e, convention: str = "display") -> np.ndarray:
    """Spin rotation picked up along an edge.

    ``display``: exp(-i 2 k_R L ((sigma x n).e)); ``hamiltonian``:
    exp(-i k_R L sigma_e), the SU(2) factor of the edge propagator used by
    the spectral and transport solvers.
    """
    if convention == "display":
        return expi_involution(2 * k_rashba * L_e, cross_n_sigma(e))
    if convention == "hamiltonian":
        return expi_involution(k_rashba * L_e, rashba_sigma(e))
    raise ValueError(f"unknown convention {convention!r}")


# diamond chain

@dataclass(frozen=True)
class LeadGraph:
    """A metric graph with one semi-infinite free lead attached at each listed vertex."""

    graph: MetricGraph
    leads: tuple[int, ...]
    upper_edges: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    def potentials(self, flux: float) -> np.ndarray:
        """Edge potentials giving ``flux`` through every loop, carried by the upper edges."""
        A = np.zeros(self.graph.n_edges)
        for i in self.upper_edges:
            A[i] = flux / (2 * self.graph.edges[i].length)
        return A

    def with_lengths(self, lengths) -> "LeadGraph":
        return LeadGraph(self.graph.with_lengths(lengths), self.leads, self.upper_edges, dict(self.meta))


DiamondChain = LeadGraph


def build_diamond_chain(M: int, L: float = 1.0) -> LeadGraph:
    """M square rhombi in a row, edges at +-45 degrees, leads on the two end hubs."""
    if int(M) != M or M < 1:
        raise LatticeError("M must be a positive integer")
    if not L > 0:
        raise LatticeError("edge length must be positive")
    h = L / np.sqrt(2)
    verts = [{"id": "h0", "x": 0.0, "y": 0.0}]
    edges = []
    upper = []
    for i in range(M):
        x0 = 2 * h * i
        verts += [{"id": f"t{i}", "x": x0 + h, "y": h}, {"id": f"b{i}", "x": x0 + h, "y": -h},
                  {"id": f"h{i + 1}", "x": x0 + 2 * h, "y": 0.0}]
        upper += [len(edges), len(edges) + 1]
        edges += [(f"h{i}", f"t{i}"), (f"t{i}", f"h{i + 1}"), (f"h{i}", f"b{i}"), (f"b{i}", f"h{i + 1}")]
    g = build_graph({"vertices": verts,
                     "edges": [{"id": j, "from": a, "to": b, "length": L} for j, (a, b) in enumerate(edges)]})
    return LeadGraph(g, (g.vertex_index("h0"), g.vertex_index(f"h{M}")), tuple(upper), {"M": M, "L": L})


def perturb_lengths(chain: LeadGraph, rel: float, rng: np.random.Generator) -> LeadGraph:
    L = np.array([e.length for e in chain.graph.edges])
    return chain.with_lengths(L * (1 + rel * rng.uniform(-1, 1, len(L))))


# transport

@dataclass
class TransmissionResult:
    k: float
    conductance: float
    t: np.ndarray
    smatrix: np.ndarray
    unitarity_deficit: float
    reverse_conductance: float


def _flux_transition(A, B, ks) -> np.ndarray:
    sq = np.sqrt(ks)
    C = A / sq
    D = B * sq
    return -np.linalg.solve(C - 1j * D, C + 1j * D)


class _OpenSystem:
    """Scattering assembly for a LeadGraph at fixed k_R and edge potentials."""

    def __init__(self, chain: LeadGraph, k_rashba: float, potentials, epsilon=None):
        g = chain.graph
        self.g = g
        self.chain = chain
        self.params = RashbaParams(k_rashba, list(potentials), epsilon or {})
        nb = g.n_bonds
        self.n = 2 * nb
        self.rot = np.stack([rashba_bond_rotation(g, self.params, b) for b in range(nb)])
        self.lengths = g.bond_lengths()
        self.k_rashba = k_rashba
        self.nlead = 2 * len(chain.leads)
        # static index layout per vertex: internal rows/cols and lead rows/cols
        self.layout = []
        lead_slot = {v: j for j, v in enumerate(chain.leads)}
        for v in range(g.n_vertices):
            ends = g.ends(v)
            d = len(ends)
            has_lead = v in lead_slot
            dt = d + int(has_lead)
            eps = self.params.coupling(v)
            if eps == DIRICHLET:
                a, b = np.eye(dt), np.zeros((dt, dt))
            else:
                a, b = laplace_neumann_pair(dt, float(eps))
            rows = [2 * e.out_bond + s for e in ends for s in (0, 1)]
            cols = [2 * e.in_bond + s for e in ends for s in (0, 1)]
            lslot = [2 * lead_slot[v] + s for s in (0, 1)] if has_lead else []
            self.layout.append((a, b, d, has_lead, rows, cols, lslot))

    def smatrix(self, k: float):
        q = np.sqrt(k * k + self.k_rashba**2)
        n, nl = self.n, self.nlead
        Tii = sp.lil_matrix((n, n), dtype=complex)
        Til = np.zeros((n, nl), dtype=complex)
        Tli = sp.lil_matrix((nl, n), dtype=complex)
        Tll = np.zeros((nl, nl), dtype=complex)
        for a, b, d, has_lead, rows, cols, lslot in self.layout:
            ks = np.array([q] * d + ([k] if has_lead else []))
            Tv = np.kron(_flux_transition(a, b, ks), I2)
            ni = 2 * d
            Tii[np.ix_(rows, cols)] = Tv[:ni, :ni]
            if has_lead:
                Til[rows, lslot[0]] = Tv[:ni, ni]
                Til[rows, lslot[1]] = Tv[:ni, ni + 1]
                for s in (0, 1):
                    Tli[lslot[s], cols] = Tv[ni + s, :ni]
                Tll[np.ix_(lslot, lslot)] = Tv[ni:, ni:]
        ph = np.exp(1j * q * self.lengths)[:, None, None] * self.rot
        D = sp.block_diag(list(ph), format="csc")
        Tii = Tii.tocsc()
        lu = splu((sp.identity(n, dtype=complex, format="csc") - Tii @ D).tocsc())
        o = lu.solve(Til)
        return np.asarray(Tli.tocsr() @ (D @ o)) + Tll

    def transmission(self, k: float) -> TransmissionResult:
        if k <= 0:
            raise TransmissionError("k must be positive")
        last = None
        for kk in (k, k + 1e-9):
            try:
                S = self.smatrix(kk)
            except RuntimeError as exc:
                last = exc
                continue
            if not np.all(np.isfinite(S)):
                continue
            deficit = float(np.linalg.norm(S.conj().T @ S - np.eye(self.nlead), 2))
            if deficit > 1e-8:
                last = TransmissionError(f"unitarity deficit {deficit:.2e} at k={kk}")
                continue
            t = S[2:4, 0:2]
            tr = S[0:2, 2:4]
            return TransmissionResult(kk, float(np.sum(np.abs(t) ** 2)), t, S, deficit,
                                      float(np.sum(np.abs(tr) ** 2)))
        raise TransmissionError(f"interior system singular near k={k}: {last}")


def transmission(chain: LeadGraph, k: float, k_rashba: float = 0.0, flux: float = 0.0,
                 epsilon=None) -> TransmissionResult:
    """Two-terminal transmission; G sums |t|^2 over both spin channels."""
    if len(chain.leads) != 2:
        raise TransmissionError("transmission needs exactly two leads")
    return _OpenSystem(chain, k_rashba, chain.potentials(flux), epsilon).transmission(k)


def k_samples(L: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n injection wavenumbers drawn uniformly from (0, pi/L].

    A regular grid would alias with the Fabry-Perot period of the chain.
    """
    return np.sort(np.pi / L * (1.0 - rng.random(n)))


def mean_conductance(chain: LeadGraph, k_rashba: float, flux: float, ks) -> tuple[float, float]:
    sys_ = _OpenSystem(chain, k_rashba, chain.potentials(flux))
    G = np.array([sys_.transmission(k).conductance for k in ks])
    return float(G.mean()), float(G.min())


@dataclass
class ScanResult:
    k_rashba: np.ndarray
    flux: np.ndarray
    G_mean: np.ndarray
    G_min: np.ndarray

    def minimum(self):
        i, j = np.unravel_index(np.argmin(self.G_mean), self.G_mean.shape)
        return float(self.k_rashba[i]), float(self.flux[j]), float(self.G_mean[i, j])


def localization_scan(chain: LeadGraph, k_rashba_grid, flux_grid, ks) -> ScanResult:
    kr = np.asarray(k_rashba_grid, float)
    fl = np.asarray(flux_grid, float)
    if kr.size == 0 or fl.size == 0 or len(ks) == 0:
        raise LatticeError("scan grids must be nonempty")
    Gm = np.zeros((len(kr), len(fl)))
    Gn = np.zeros_like(Gm)
    for i, a in enumerate(kr):
        for j, f in enumerate(fl):
            Gm[i, j], Gn[i, j] = mean_conductance(chain, a, f, ks)
    return ScanResult(kr, fl, Gm, Gn)


# T3 lattice band conditions

@dataclass(frozen=True)
class T3BandQuery:
    E: float
    lam: float = 0.0
    mu: float = 0.0
    k_rashba: float = np.pi / 2
    omega: float = -np.pi / 6


def _on_lattice(x: float, offset: float, period: float, tol: float = 1e-9) -> bool:
    r = (x - offset) / period
    return abs(r - np.rint(r)) <= tol


def check_t3_regime(k_rashba: float, omega: float, regime: str) -> None:
    if regime == "bands":
        ok = abs(np.cos(k_rashba)) <= 1e-9 and _on_lattice(omega, -np.pi / 6, np.pi)
        need = "cos k_R = 0 and omega in -pi/6 + pi Z"
    elif regime == "flat":
        ok = _on_lattice(k_rashba, 0.0, 1.0) and _on_lattice(omega, np.pi / 2, np.pi)
        need = "k_R in Z and omega in pi/2 + pi Z"
    else:
        raise ValueError(f"unknown regime {regime!r}")
    if not ok:
        raise T3RegimeError(f"closed form needs {need}")


def _band(E, lam, mu, k_rashba):
    x = np.sqrt(E + k_rashba**2)
    if lam == 0 and mu == 0:
        return np.cos(x) ** 2
    c, s = np.cos(x), np.sin(x)
    rE = np.sqrt(E)
    return (c + lam / (6 * rE) * s) * (c + mu / (3 * rE) * s)


def t3_band_value(q: T3BandQuery, regime: str | None = "bands") -> float:
    if regime is not None:
        check_t3_regime(q.k_rashba, q.omega, regime)
    if q.E + q.k_rashba**2 <= 0:
        raise LatticeError("need E + k_R^2 > 0")
    if (q.lam or q.mu) and q.E <= 0:
        raise LatticeError("need E > 0 when lambda or mu is nonzero")
    return float(_band(q.E, q.lam, q.mu, q.k_rashba))


SINGLETON_TOL = 1e-12


def band_membership(value: float, neumann: bool) -> bool:
    if 0 <= value <= 1 / 6 or 0.5 <= value <= 2 / 3 or abs(value - 1 / 3) <= SINGLETON_TOL:
        return True
    return neumann and abs(value - 1.0) <= SINGLETON_TOL


def t3_in_spectrum(q: T3BandQuery, regime: str | None = "bands") -> bool:
    v = t3_band_value(q, regime)
    if abs(np.sin(np.sqrt(q.E + q.k_rashba**2))) <= SINGLETON_TOL:
        return True
    return band_membership(v, neumann=(q.lam == 0 and q.mu == 0))


def t3_flat_bands(lam: float, mu: float, k_rashba: float, E_range: tuple[float, float],
                  omega: float = np.pi / 2, xtol: float = 1e-14) -> list[float]:
    """Energies in E_range where the band value equals 1/3 (collapsed flat bands)."""
    check_t3_regime(k_rashba, omega, "flat")
    lo, hi = E_range
    if not hi > lo:
        raise LatticeError("empty energy range")
    lo = max(lo, -k_rashba**2 + 1e-12)
    if lam or mu:
        lo = max(lo, 1e-12)

    def f(E):
        return _band(E, lam, mu, k_rashba) - 1 / 3

    def roots_on(n):
        E = np.linspace(lo, hi, n)
        v = f(E)
        out = []
        for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) <= 0)[0]:
            if v[i] == 0:
                out.append(float(E[i]))
            elif v[i + 1] != 0:
                out.append(brentq(f, E[i], E[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
        return sorted(set(out)), (hi - lo) / (n - 1)

    n = 257
    roots, step = roots_on(n)
    while True:
        roots2, step2 = roots_on(2 * n - 1)
        gap = np.min(np.diff(roots2)) if len(roots2) > 1 else np.inf
        if len(roots2) == len(roots) and step2 < gap / 2:
            return roots2
        n, roots = 2 * n - 1, roots2
        if n > 2**22:
            return roots2
