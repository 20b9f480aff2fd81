"""Matching conditions and vertex transition matrices for Dirac, Pauli and Rashba operators.

All vertex matrices use the (edge end) x (spin) ordering: index ``2*j + s``
is spin component ``s`` on the ``j``-th end listed by ``MetricGraph.ends``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .graph import GraphError, MetricGraph, edge_unit_vector
from .su2 import I2, J, PAULI, SIGMA_X, SIGMA_Y, SIGMA_Z, expi_involution, is_su2

RANK_RTOL = 1e-10
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10


class MatchingError(ValueError):
    pass


class ClosedChannelError(ValueError):
    pass


DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class SelfAdjointCheck:
    ok: bool
    rank: int
    full_rank: int
    hermiticity_error: float

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class DiracParams:
    mass: float = 0.0

    def __post_init__(self):
        if self.mass < 0:
            raise MatchingError("Dirac mass must be nonnegative")

    @property
    def time_reversal_symmetric(self) -> bool:
        return self.mass == 0


@dataclass(frozen=True)
class RashbaParams:
    """Rashba coupling, constant edge potentials (along the forward bond) and vertex couplings.

    ``epsilon`` maps a vertex index to a real coupling or the string
    ``"dirichlet"``; missing vertices get 0 (Neumann-like).
    """

    k_rashba: float = 0.0
    potentials: Sequence[float] | None = None
    epsilon: Mapping[int, float | str] = field(default_factory=dict)

    def potential(self, edge: int) -> float:
        return 0.0 if self.potentials is None else float(self.potentials[edge])

    def coupling(self, v: int) -> float | str:
        return self.epsilon.get(v, 0.0)


@dataclass(frozen=True)
class VertexTransition:
    """Unitary map from incoming to outgoing amplitudes at one vertex."""

    vertex: int
    dim: int
    evaluate: Callable[[float], np.ndarray]
    constant: bool = False

    def __call__(self, k: float) -> np.ndarray:
        return self.evaluate(k)


def constant_transition(vertex: int, T: np.ndarray) -> VertexTransition:
    T = np.array(T, dtype=complex)
    T.setflags(write=False)
    return VertexTransition(vertex, T.shape[0], lambda k: T, constant=True)


def check_self_adjoint(A, B) -> SelfAdjointCheck:
    """Maximal rank of (A, B) and Hermiticity of A B^dagger."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise MatchingError(f"A and B must be square and equal in size, got {A.shape}, {B.shape}")
    n = A.shape[0]
    sv = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
    rank = int(np.sum(sv >= RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    AB = A @ B.conj().T
    herm = float(np.linalg.norm(AB - AB.conj().T, 2))
    scale = 1.0 + np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
    ok = rank == n and herm <= HERMITIAN_TOL * scale
    return SelfAdjointCheck(bool(ok), rank, n, herm)


def dirac_gamma(k: float, m: float = 0.0) -> float:
    """(E - m)/k with E = sqrt(k^2 + m^2), in units hbar = c = 1."""
    if k <= 0:
        raise ValueError("dirac_gamma needs k > 0")
    if m == 0:
        return 1.0
    # (E - m)/k rewritten to avoid cancellation at large k
    return k / (np.hypot(k, m) + m)


def _transition(A, B, C) -> np.ndarray:
    """-(A - i B C)^{-1} (A + i B C) for a diagonal or scalar C."""
    minus = A - 1j * (B @ C if np.ndim(C) else B * C)
    plus = A + 1j * (B @ C if np.ndim(C) else B * C)
    try:
        return -np.linalg.solve(minus, plus)
    except np.linalg.LinAlgError:
        raise MatchingError("A - i gamma B is singular at this wavenumber") from None


def dirac_vertex_transition(A, B, gamma: float) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if not check_self_adjoint(A, B):
        raise MatchingError("matching conditions are not self-adjoint")
    return _transition(A, B, gamma)


def neumann_X(d: int) -> np.ndarray:
    """Neumann transition amplitudes 2/d - delta for a vertex of valency d."""
    if d < 1:
        raise ValueError("valency must be at least 1")
    return np.full((d, d), 2.0 / d) - np.eye(d)


def delta_X(d: int, epsilon: float, k: float) -> np.ndarray:
    """Transition for continuity plus sum of outward derivatives = epsilon f(v)."""
    return np.full((d, d), 2.0 / (d + 1j * epsilon / k)) - np.eye(d)


def laplace_neumann_pair(d: int, epsilon: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Scalar (A, B) for continuity and sum f' = epsilon f(v) (epsilon=0 is Neumann)."""
    A = np.zeros((d, d))
    B = np.zeros((d, d))
    for i in range(d - 1):
        A[i, i], A[i, i + 1] = 1.0, -1.0
    A[d - 1, 0] = -epsilon
    B[d - 1, :] = 1.0
    return A, B


def block_diag_su2(U: Sequence[np.ndarray]) -> np.ndarray:
    d = len(U)
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    for j, u in enumerate(U):
        out[2 * j:2 * j + 2, 2 * j:2 * j + 2] = u
    return out


def dirac_neumann_pair(U: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Neumann-like Dirac conditions: rotated spinors agree, rotated f_- sum to zero."""
    d = len(U)
    a, b = laplace_neumann_pair(d)
    Ub = block_diag_su2(U)
    return np.kron(a, I2) @ Ub, np.kron(b, I2) @ Ub


def tr_symmetric_transition(X, U: Sequence[np.ndarray]) -> np.ndarray:
    """U^{-1} (X (x) I_2) U with U = diag(u_1, ..., u_d)."""
    X = np.asarray(X, dtype=complex)
    d = X.shape[0]
    if X.shape != (d, d):
        raise MatchingError("X must be square")
    if np.linalg.norm(X - X.T) > UNITARY_TOL:
        raise MatchingError("X is not symmetric")
    if np.linalg.norm(X.conj().T @ X - np.eye(d)) > UNITARY_TOL:
        raise MatchingError("X is not unitary")
    if len(U) != d:
        raise MatchingError(f"need {d} spin rotations, got {len(U)}")
    Ub = block_diag_su2(U)
    return Ub.conj().T @ np.kron(X, I2) @ Ub


def check_time_reversal(T, tol: float = 1e-10) -> bool:
    """T^T == -(I (x) J) T (I (x) J)."""
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    if n % 2:
        raise MatchingError("transition dimension must be even")
    IJ = np.kron(np.eye(n // 2), J)
    return bool(np.linalg.norm(T.T + IJ @ T @ IJ) <= tol * max(1.0, np.linalg.norm(T)))


def is_unitary(M, tol: float = UNITARY_TOL) -> bool:
    M = np.asarray(M)
    return bool(np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0]), 2) <= tol)


def block_decompose(block: np.ndarray, tol: float = 1e-10) -> tuple[complex, np.ndarray]:
    """Split a 2x2 block as c * u with u in SU(2).

    The scalar sign is fixed so that Re tr(u) >= 0, which makes spin-blind
    blocks ``x * I`` decompose as ``(x, I)``.
    """
    block = np.asarray(block, dtype=complex)
    sigma = np.sqrt(abs(np.linalg.det(block)))
    if np.linalg.norm(block.conj().T @ block - sigma**2 * I2) > tol:
        raise MatchingError("block is not a scalar multiple of a unitary")
    if sigma < tol:
        return 0.0, I2.copy()
    c = np.sqrt(np.linalg.det(block))
    u = block / c
    if np.trace(u).real < 0:
        c, u = -c, -u
    if abs(c.imag) <= tol * abs(c):
        c = c.real
    return c, u


# Pauli

def pauli_diagonalize_field(B) -> tuple[float, np.ndarray]:
    """Return (|B|, u) with B.sigma = |B| u sigma_z u^{-1}, u in SU(2)."""
    B = np.asarray(B, dtype=float)
    mag = float(np.linalg.norm(B))
    if mag == 0:
        return 0.0, I2.copy()
    theta = np.arctan2(np.hypot(B[0], B[1]), B[2])  # arccos loses small angles
    phi = np.arctan2(B[1], B[0])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    u = np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]])
    return mag, u


def field_dot_sigma(B) -> np.ndarray:
    return sum(b * p for b, p in zip(B, PAULI))


def pauli_channel_wavenumbers(lam: float, magnitude: float) -> tuple[float, float]:
    if lam <= magnitude:
        raise ClosedChannelError(f"lambda={lam} <= |B|={magnitude}: closed channel")
    return float(np.sqrt(lam - magnitude)), float(np.sqrt(lam + magnitude))


def pauli_vertex_transition(A, B, U, K) -> np.ndarray:
    """Flux-normalised Pauli vertex transition in the field eigenbasis.

    With C = A U K^{-1/2} and D = B U K^{1/2} this is -(C - iD)^{-1}(C + iD),
    which is unitary whenever (A, B) is self-adjoint.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    U = np.asarray(U, dtype=complex)
    kd = np.diag(K) if np.ndim(K) == 2 else np.asarray(K, dtype=float)
    if np.any(kd <= 0):
        raise ClosedChannelError("wavenumbers must be positive")
    if not check_self_adjoint(A, B):
        raise MatchingError("matching conditions are not self-adjoint")
    sq = np.sqrt(kd)
    C = (A @ U) / sq
    D = (B @ U) * sq
    try:
        return -np.linalg.solve(C - 1j * D, C + 1j * D)
    except np.linalg.LinAlgError:
        raise MatchingError("singular Pauli matching matrix") from None


# Rashba

def rashba_sigma(e) -> np.ndarray:
    """[[0, e_y + i e_x], [e_y - i e_x, 0]] = e_y sigma_x - e_x sigma_y."""
    ex, ey = (float(x) for x in e)
    if abs(ex * ex + ey * ey - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return np.array([[0, ey + 1j * ex], [ey - 1j * ex, 0]])


@dataclass(frozen=True)
class RashbaEdgeSolution:
    """General edge solution f(x) = W(x) [c+ e^{iqx} + c- e^{-iqx}], W(x) = exp(-i(A + k_R sigma_e) x).

    ``value`` and ``covariant_derivative`` return 2x4 matrices acting on
    (c+, c-); the covariant derivative is (d/dx + i(A + k_R sigma_e)) f.
    """

    length: float
    q: float
    generator: np.ndarray

    def W(self, x: float) -> np.ndarray:
        return expm(-1j * self.generator * x)

    def value(self, x: float) -> np.ndarray:
        w = self.W(x)
        return np.hstack([w * np.exp(1j * self.q * x), w * np.exp(-1j * self.q * x)])

    def covariant_derivative(self, x: float) -> np.ndarray:
        w = self.W(x)
        iq = 1j * self.q
        return np.hstack([iq * w * np.exp(iq * x), -iq * w * np.exp(-iq * x)])

    @property
    def spin_factor(self) -> np.ndarray:
        """SU(2) part of W(L), exp(-i k_R L sigma_e)."""
        a = np.trace(self.generator).real / 2
        return np.exp(1j * a * self.length) * self.W(self.length)


def rashba_edge_transfer(L: float, k_rashba: float, potential: float, e, E: float) -> RashbaEdgeSolution:
    if E + k_rashba**2 <= 0:
        raise ClosedChannelError("E + k_R^2 must be positive")
    q = float(np.sqrt(E + k_rashba**2))
    gen = potential * I2 + k_rashba * rashba_sigma(e)
    return RashbaEdgeSolution(float(L), q, gen)


def rashba_bond_rotation(g: MetricGraph, params: RashbaParams, b: int) -> np.ndarray:
    """W(L) for bond b: exp(-i(A_b + k_R sigma_b) L), A and direction flip on reversal."""
    e = g.edges[b // 2]
    sign = -1.0 if b % 2 else 1.0
    sig = rashba_sigma(edge_unit_vector(g, b))
    return np.exp(-1j * sign * params.potential(b // 2) * e.length) * expi_involution(
        params.k_rashba * e.length, sig)


class RashbaVertexSystem:
    """Continuity and covariant-flux conditions for the Rashba operator as M(E) c = 0.

    Unknowns are (c+, c-) per edge, four complex numbers each. Outgoing ends
    (edge tail at the vertex) enter the flux sum with +, incoming ends with -.
    """

    def __init__(self, g: MetricGraph, params: RashbaParams):
        if not g.has_embedding:
            raise GraphError("Rashba operator needs a planar embedding")
        self.g = g
        self.params = params
        self.dirs = [edge_unit_vector(g, 2 * i) for i in range(g.n_edges)]

    def edge_solutions(self, E: float) -> list[RashbaEdgeSolution]:
        return [rashba_edge_transfer(e.length, self.params.k_rashba, self.params.potential(i),
                                     self.dirs[i], E)
                for i, e in enumerate(self.g.edges)]

    def matrix(self, E: float) -> np.ndarray:
        g = self.g
        sols = self.edge_solutions(E)
        n = 4 * g.n_edges
        M = np.zeros((n, n), dtype=complex)
        row = 0
        for v in range(g.n_vertices):
            ends = g.ends(v)
            vals, ders = [], []
            for end in ends:
                s = sols[end.edge]
                x = 0.0 if end.at_tail else s.length
                blk_v = np.zeros((2, n), dtype=complex)
                blk_d = np.zeros((2, n), dtype=complex)
                blk_v[:, 4 * end.edge:4 * end.edge + 4] = s.value(x)
                sign = 1.0 if end.at_tail else -1.0
                blk_d[:, 4 * end.edge:4 * end.edge + 4] = sign * s.covariant_derivative(x)
                vals.append(blk_v)
                ders.append(blk_d)
            eps = self.params.coupling(v)
            if eps == DIRICHLET:
                for blk in vals:
                    M[row:row + 2] = blk
                    row += 2
                continue
            for j in range(1, len(ends)):
                M[row:row + 2] = vals[0] - vals[j]
                row += 2
            M[row:row + 2] = sum(ders) - float(eps) * vals[0]
            row += 2
        return M

    def nullity(self, E: float, rtol: float = 1e-8) -> int:
        sv = np.linalg.svd(self.matrix(E), compute_uv=False)
        return int(np.sum(sv <= rtol * sv[0]))

    def smallest_singular_values(self, E: float, count: int = 4) -> np.ndarray:
        sv = np.linalg.svd(self.matrix(E), compute_uv=False)
        return sv[::-1][:count] / sv[0]


def rashba_vertex_system(g: MetricGraph, params: RashbaParams) -> RashbaVertexSystem:
    return RashbaVertexSystem(g, params)
