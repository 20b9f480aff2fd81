"""Bond scattering matrices S = D T on the (directed bond) x (spin) space.

Global index ``2*b + s`` is spin component ``s`` on bond ``b``. The vector
holds amplitudes arriving at bond termini; T scatters them into outgoing
amplitudes at the vertex and D propagates those along the bonds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .graph import GraphError, MetricGraph, total_length
from .operators import (
    DIRICHLET, MatchingError, RashbaParams, VertexTransition, block_decompose,
    constant_transition, delta_X, dirac_gamma, dirac_neumann_pair, dirac_vertex_transition,
    check_self_adjoint, neumann_X, pauli_channel_wavenumbers, pauli_diagonalize_field,
    pauli_vertex_transition, rashba_bond_rotation, tr_symmetric_transition,
)
from .su2 import I2, haar_su2


@dataclass
class BondScattering:
    """Evaluator x -> S(x) for a spectral parameter x (k, or lambda for Pauli).

    ``propagator(x)`` returns either a length-4N vector (diagonal D) or an
    array of 2N 2x2 blocks. ``phase_rate`` bounds d arg det S / dx and sets
    the scan step.
    """

    graph: MetricGraph
    transition: Callable[[float], np.ndarray]
    propagator: Callable[[float], np.ndarray]
    phase_rate: Callable[[float], float]
    operator: str = "dirac"
    variable: str = "k"
    transitions_constant: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 2 * self.graph.n_bonds

    def S(self, x: float) -> np.ndarray:
        return _apply_propagator(self.propagator(x), self.transition(x))

    def S_batch(self, xs: Sequence[float]) -> np.ndarray:
        if self.transitions_constant:
            T = self.transition(xs[0])
            out = np.empty((len(xs), self.dim, self.dim), dtype=complex)
            for i, x in enumerate(xs):
                out[i] = _apply_propagator(self.propagator(x), T)
            return out
        return np.stack([self.S(x) for x in xs])

    def block(self, x: float, b_to: int, b_from: int) -> np.ndarray:
        """2x2 vertex transition block from bond ``b_from`` into bond ``b_to``."""
        T = self.transition(x)
        return T[2 * b_to:2 * b_to + 2, 2 * b_from:2 * b_from + 2]


def _apply_propagator(P: np.ndarray, T: np.ndarray) -> np.ndarray:
    if P.ndim == 1:
        return P[:, None] * T
    n = P.shape[0]
    return np.einsum("bij,bjk->bik", P, T.reshape(n, 2, -1)).reshape(2 * n, -1)


def assemble_transition(g: MetricGraph, transitions: Mapping[int, VertexTransition]):
    """Scatter per-vertex transitions into the global bond-to-bond matrix T(x)."""
    layout = []
    for v in range(g.n_vertices):
        ends = g.ends(v)
        if v not in transitions:
            raise MatchingError(f"no transition given for vertex {g.vertices[v].id!r}")
        tv = transitions[v]
        if tv.dim != 2 * len(ends):
            raise MatchingError(
                f"vertex {g.vertices[v].id!r}: transition has dim {tv.dim}, valency needs {2 * len(ends)}")
        rows = np.array([2 * e.out_bond + s for e in ends for s in (0, 1)])
        cols = np.array([2 * e.in_bond + s for e in ends for s in (0, 1)])
        layout.append((tv, rows, cols))
    n = 2 * g.n_bonds

    def T(x: float) -> np.ndarray:
        out = np.zeros((n, n), dtype=complex)
        for tv, rows, cols in layout:
            out[np.ix_(rows, cols)] = tv(x)
        return out

    constant = all(tv.constant for tv, _, _ in layout)
    if constant:
        T0 = T(1.0)
        T0.setflags(write=False)
        return (lambda x: T0), True
    return T, False


def assemble_bond_scattering(g: MetricGraph, transitions: Mapping[int, VertexTransition],
                             mass: float = 0.0) -> BondScattering:
    """Dirac bond scattering with D(k) = diag(e^{ikL_b}) (x) I_2."""
    T, const = assemble_transition(g, transitions)
    lengths = np.repeat(g.bond_lengths(), 2)
    L = total_length(g)

    def prop(k):
        return np.exp(1j * k * lengths)

    rate = 4 * L if const else 6 * L
    return BondScattering(g, T, prop, lambda k: rate, "dirac", "k", const,
                          {"mass": mass, "total_length": L})


# convenience constructors

def haar_rotations(g: MetricGraph, rng: np.random.Generator) -> dict[int, list[np.ndarray]]:
    """One Haar SU(2) element per edge end, drawn vertex by vertex."""
    return {v: list(haar_su2(rng, g.degree(v))) for v in range(g.n_vertices)}


def identity_rotations(g: MetricGraph) -> dict[int, list[np.ndarray]]:
    return {v: [I2.copy() for _ in range(g.degree(v))] for v in range(g.n_vertices)}


def dirac_neumann_transitions(g: MetricGraph, rotations=None, mass: float = 0.0,
                              via_matching: bool = False) -> dict[int, VertexTransition]:
    """Neumann-like Dirac transitions U^{-1}(X (x) I)U at every vertex.

    With ``via_matching`` the matrices are built from the (A, B) pair instead
    of the closed form; for m > 0 that route is always taken since gamma != 1.
    """
    rotations = rotations if rotations is not None else identity_rotations(g)
    out = {}
    for v in range(g.n_vertices):
        U = rotations[v]
        if mass == 0 and not via_matching:
            out[v] = constant_transition(v, tr_symmetric_transition(neumann_X(len(U)), U))
        else:
            A, B = dirac_neumann_pair(U)
            out[v] = _dirac_from_pair(v, A, B, mass)
    return out


def _dirac_from_pair(v: int, A, B, mass: float) -> VertexTransition:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if not check_self_adjoint(A, B):
        raise MatchingError(f"self-adjointness violated at vertex {v}")
    if mass == 0:
        return constant_transition(v, dirac_vertex_transition(A, B, 1.0))
    return VertexTransition(v, A.shape[0], lambda k: dirac_vertex_transition(A, B, dirac_gamma(k, mass)))


def dirac_transitions_from_pairs(g: MetricGraph, pairs: Mapping[int, tuple], mass: float = 0.0):
    return {v: _dirac_from_pair(v, *pairs[v], mass) for v in range(g.n_vertices)}


def dirac_neumann_scattering(g: MetricGraph, rotations=None, mass: float = 0.0) -> BondScattering:
    return assemble_bond_scattering(g, dirac_neumann_transitions(g, rotations, mass), mass)


# Pauli

def pauli_bond_scattering(g: MetricGraph, pairs: Mapping[int, tuple], fields: Sequence) -> BondScattering:
    """Pauli operator scanned in the energy lambda.

    ``pairs[v]`` is a 2d x 2d (A, B) acting on lab-frame spinors at the ends
    of v; ``fields[e]`` is the constant field B_e on edge e.
    """
    diag = [pauli_diagonalize_field(B) for B in fields]
    mags = np.array([m for m, _ in diag])
    lengths = np.array([e.length for e in g.edges])
    per_vertex = []
    for v in range(g.n_vertices):
        ends = g.ends(v)
        A, B = (np.asarray(x, dtype=complex) for x in pairs[v])
        if not check_self_adjoint(A, B):
            raise MatchingError(f"self-adjointness violated at vertex {g.vertices[v].id!r}")
        U = np.zeros((2 * len(ends), 2 * len(ends)), dtype=complex)
        for j, end in enumerate(ends):
            U[2 * j:2 * j + 2, 2 * j:2 * j + 2] = diag[end.edge][1]
        edges = [end.edge for end in ends]
        per_vertex.append((A, B, U, edges))

    def channels(lam):
        return np.array([pauli_channel_wavenumbers(lam, m) for m in mags])  # (N, 2)

    transitions = {}
    for v, (A, B, U, edges) in enumerate(per_vertex):
        def ev(lam, A=A, B=B, U=U, edges=edges):
            ks = channels(lam)[edges].ravel()
            return pauli_vertex_transition(A, B, U, ks)
        transitions[v] = VertexTransition(v, A.shape[0], ev)
    T, const = assemble_transition(g, transitions)

    def prop(lam):
        ks = channels(lam)  # (N, 2)
        ph = np.exp(1j * ks * lengths[:, None])
        return np.repeat(ph, 2, axis=0).ravel()

    def rate(lam):
        ks = channels(lam)
        return 4.0 * float(np.sum(lengths[:, None] / ks))

    return BondScattering(g, T, prop, rate, "pauli", "lambda", const,
                          {"total_length": total_length(g), "field_magnitudes": mags.tolist()})


def pauli_laplace_pairs(g: MetricGraph, kind: Mapping[int, str] | None = None,
                        epsilon: Mapping[int, float] | None = None):
    """Spin-blind (A, B) for Pauli vertices: 'neumann', 'delta' or 'dirichlet'."""
    from .operators import laplace_neumann_pair
    kind = kind or {}
    epsilon = epsilon or {}
    pairs = {}
    for v in range(g.n_vertices):
        d = g.degree(v)
        t = kind.get(v, "neumann")
        if t == "dirichlet":
            a, b = np.eye(d), np.zeros((d, d))
        else:
            a, b = laplace_neumann_pair(d, epsilon.get(v, 0.0) if t == "delta" else 0.0)
        pairs[v] = (np.kron(a, I2), np.kron(b, I2))
    return pairs


# Rashba

def rashba_transitions(g: MetricGraph, params: RashbaParams) -> dict[int, VertexTransition]:
    out = {}
    for v in range(g.n_vertices):
        d = g.degree(v)
        eps = params.coupling(v)
        if eps == DIRICHLET:
            out[v] = constant_transition(v, -np.eye(2 * d))
        elif float(eps) == 0.0:
            out[v] = constant_transition(v, np.kron(neumann_X(d), I2))
        else:
            out[v] = VertexTransition(v, 2 * d, lambda q, d=d, e=float(eps): np.kron(delta_X(d, e, q), I2))
    return out


def rashba_bond_scattering(g: MetricGraph, params: RashbaParams) -> BondScattering:
    """Rashba scattering in q = sqrt(E + k_R^2): D_b = e^{iqL_b} exp(-i(A_b + k_R sigma_b)L_b)."""
    if not g.has_embedding:
        raise GraphError("Rashba operator needs a planar embedding")
    T, const = assemble_transition(g, rashba_transitions(g, params))
    rot = np.stack([rashba_bond_rotation(g, params, b) for b in range(g.n_bonds)])
    lengths = g.bond_lengths()
    L = total_length(g)

    def prop(q):
        return np.exp(1j * q * lengths)[:, None, None] * rot

    rate = 4 * L if const else 6 * L
    return BondScattering(g, T, prop, lambda q: rate, "rashba", "q", const,
                          {"total_length": L, "k_rashba": params.k_rashba})


def transition_blocks(bs: BondScattering, x: float = 1.0):
    """Decompose every nonzero vertex block as (scalar, SU(2)); keyed by (b_from, b_to)."""
    g = bs.graph
    T = bs.transition(x)
    out = {}
    for b in range(g.n_bonds):
        v = g.terminus(b)
        for end in g.ends(v):
            blk = T[2 * end.out_bond:2 * end.out_bond + 2, 2 * b:2 * b + 2]
            out[(b, end.out_bond)] = block_decompose(blk)
    return out
