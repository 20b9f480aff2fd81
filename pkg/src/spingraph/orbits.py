"""Periodic orbits, their weights, the trace formula and orbit-pair form factors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import MetricGraph
from .scattering import BondScattering
from .operators import block_decompose
from .su2 import I2, haar_su2

DEFAULT_CAP = 2_000_000


class OrbitCapExceeded(RuntimeError):
    def __init__(self, estimate: float, cap: int):
        super().__init__(f"about {estimate:.3g} orbit classes exceed the cap of {cap}; "
                         "lower n_max or raise the cap")
        self.estimate = estimate


@dataclass(frozen=True)
class PeriodicOrbit:
    bonds: tuple[int, ...]
    length: float
    repetitions: int

    @property
    def n(self) -> int:
        return len(self.bonds)

    @property
    def primitive(self) -> tuple[int, ...]:
        return self.bonds[: self.n // self.repetitions]


@dataclass(frozen=True)
class OrbitWeight:
    amplitude: complex
    spin: np.ndarray
    phase_index: int = 0

    @property
    def trace(self) -> float:
        return float(np.trace(self.spin).real)


def canonical_rotation(seq: Sequence[int]) -> tuple[int, ...]:
    seq = tuple(seq)
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


def primitive_repetitions(seq: Sequence[int]) -> int:
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and tuple(seq[p:]) + tuple(seq[:p]) == tuple(seq):
            return n // p
    return 1


def bond_adjacency(g: MetricGraph, bs: BondScattering | None = None, x: float = 1.0,
                   tol: float = 1e-12) -> list[list[int]]:
    """Successors of each bond; with ``bs``, steps with a vanishing block are dropped."""
    T = bs.transition(x) if bs is not None else None
    succ = []
    for b in range(g.n_bonds):
        nxt = []
        for end in g.ends(g.terminus(b)):
            b2 = end.out_bond
            if T is not None and np.abs(T[2 * b2:2 * b2 + 2, 2 * b:2 * b + 2]).max() <= tol:
                continue
            nxt.append(b2)
        succ.append(sorted(nxt))
    return succ


def estimate_classes(succ, n_max: int) -> float:
    nb = len(succ)
    B = np.zeros((nb, nb))
    for b, nxt in enumerate(succ):
        B[nxt, b] = 1
    total, P = 0.0, np.eye(nb)
    for n in range(1, n_max + 1):
        P = B @ P
        total += np.trace(P) / n
    return total


def enumerate_orbits(g: MetricGraph, n_max: int, bs: BondScattering | None = None,
                     cap: int = DEFAULT_CAP) -> list[PeriodicOrbit]:
    """All cyclic classes of closed bond walks with at most ``n_max`` steps.

    Each class is reported once, in its lexicographically minimal rotation;
    a walk and its time reverse are distinct classes unless they coincide.
    """
    if n_max < 1:
        return []
    succ = bond_adjacency(g, bs)
    est = estimate_classes(succ, n_max)
    if est > cap:
        raise OrbitCapExceeded(est, cap)
    lengths = g.bond_lengths()
    out: list[PeriodicOrbit] = []
    for start in range(g.n_bonds):
        path = [start]
        stack = [iter(s for s in succ[start] if s >= start)]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                path.pop()
                continue
            if nxt == start:
                seq = tuple(path)
                if canonical_rotation(seq) == seq:
                    out.append(PeriodicOrbit(seq, float(lengths[list(seq)].sum()),
                                             primitive_repetitions(seq)))
            if len(path) < n_max:
                path.append(nxt)
                stack.append(iter(s for s in succ[nxt] if s >= start))
    out.sort(key=lambda p: (p.n, p.bonds))
    return out


def orbit_weight(p: PeriodicOrbit, bs: BondScattering, x: float = 1.0, blocks=None) -> OrbitWeight:
    """Signed amplitude A_p and spin transport d_p (first step rightmost)."""
    if blocks is None:
        T = bs.transition(x)
    amp: complex = 1.0
    spin = I2.copy()
    seq = p.bonds
    for j, b in enumerate(seq):
        b2 = seq[(j + 1) % len(seq)]
        if blocks is not None:
            c, u = blocks[(b, b2)]
        else:
            c, u = block_decompose(T[2 * b2:2 * b2 + 2, 2 * b:2 * b + 2])
        amp *= c
        spin = u @ spin
    if isinstance(amp, complex) and abs(amp.imag) <= 1e-12 * max(abs(amp), 1e-300):
        amp = amp.real
    phase = int(np.real(amp) < 0) if np.isreal(amp) else 0
    return OrbitWeight(amp, spin, phase)


def orbit_table(orbits, bs: BondScattering, x: float = 1.0) -> list[OrbitWeight]:
    from .scattering import transition_blocks
    blocks = transition_blocks(bs, x)
    return [orbit_weight(p, bs, x, blocks) for p in orbits]


def smoothed_comb(k_grid, levels, multiplicity, width: float) -> np.ndarray:
    """Gaussian-smoothed delta comb sum_n m_n g_w(k - k_n)."""
    k_grid = np.asarray(k_grid, float)
    out = np.zeros_like(k_grid)
    norm = 1.0 / (np.sqrt(2 * np.pi) * width)
    for kn, m in zip(levels, multiplicity):
        sel = np.abs(k_grid - kn) < 12 * width
        out[sel] += m * norm * np.exp(-0.5 * ((k_grid[sel] - kn) / width) ** 2)
    return out


def trace_formula_density(orbits, weights, L_total: float, k_grid, smoothing_width: float) -> np.ndarray:
    """2L/pi + (1/pi) sum_p (l_p/r_p) Re[A_p tr(d_p) e^{ik l_p}] e^{-(l_p w)^2/2}."""
    if smoothing_width <= 0:
        raise ValueError("smoothing width must be positive")
    k_grid = np.asarray(k_grid, float)
    d = np.full_like(k_grid, 2 * L_total / np.pi)
    if not orbits:
        return d
    l = np.array([p.length for p in orbits])
    r = np.array([p.repetitions for p in orbits])
    c = np.array([w.amplitude * w.trace for w in weights], dtype=complex)
    coef = (l / r) * c * np.exp(-0.5 * (l * smoothing_width) ** 2) / np.pi
    for i in range(0, len(l), 4096):
        ph = np.exp(1j * np.outer(k_grid, l[i:i + 4096]))
        d += (ph @ coef[i:i + 4096]).real
    return d


def length_classes(orbits, rel_tol: float = 1e-9) -> list[list[int]]:
    order = np.argsort([p.length for p in orbits], kind="stable")
    classes: list[list[int]] = []
    last = None
    for i in order:
        l = orbits[i].length
        if last is not None and abs(l - last) <= rel_tol * max(l, last):
            classes[-1].append(int(i))
        else:
            classes.append([int(i)])
            last = l
    return classes


def form_factor_orbit_sum(orbits, weights, L_total: float, tau_grid, length_tolerance: float = 1e-9,
                          laplace: bool = False) -> np.ndarray:
    """Binned K(tau) from equal-length orbit pairs.

    Per length class c the pair sum is |W_c|^2 with W_c = sum (l_p/r_p) A_p tr d_p
    (without tr d_p for the Laplace variant); the Dirac prefactor is
    1/(4(2L)^2), the Laplace one 1/(2L)^2. Each class lands in the bin of the
    grid closest to l/(2L) and is divided by the bin width.
    """
    tau_grid = np.asarray(tau_grid, float)
    K = np.zeros_like(tau_grid)
    if len(tau_grid) < 2:
        raise ValueError("tau grid needs at least two points")
    dt = tau_grid[1] - tau_grid[0]
    pref = 1.0 / (2 * L_total) ** 2 / (1.0 if laplace else 4.0)
    for cls in length_classes(orbits, length_tolerance):
        tau = orbits[cls[0]].length / (2 * L_total)
        j = int(np.rint((tau - tau_grid[0]) / dt))
        if not 0 <= j < len(tau_grid):
            continue
        W = 0j
        for i in cls:
            p, w = orbits[i], weights[i]
            W += p.length / p.repetitions * w.amplitude * (1.0 if laplace else w.trace)
        K[j] += pref * abs(W) ** 2 / dt
    return K


def haar_pair_average(m: int, samples: int, rng: np.random.Generator, trivial: bool = False) -> tuple[float, float]:
    """Monte Carlo <tr d_p tr d_q> over Haar SU(2); returns (mean, standard error).

    m = 1 pairs an orbit with itself, E[(tr A)^2]; m = 2 reverses one arc at a
    self-intersection, E[tr(BA) tr(B^{-1}A)]. ``trivial`` sets every
    transport to the identity.
    """
    if m not in (1, 2):
        raise ValueError("only m = 1 and m = 2 pair families are supported")
    if samples < 10_000:
        raise ValueError("need at least 10^4 samples")
    if trivial:
        return 4.0, 0.0
    A = haar_su2(rng, samples)
    if m == 1:
        v = np.trace(A, axis1=1, axis2=2).real ** 2
    else:
        B = haar_su2(rng, samples)
        Binv = np.conj(np.transpose(B, (0, 2, 1)))
        v = (np.trace(B @ A, axis1=1, axis2=2) * np.trace(Binv @ A, axis1=1, axis2=2)).real
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(samples))
