"""Secular-equation spectra by eigenphase counting, Kramers lifting and unfolding.

For a unitary S(x) with eigenphases theta_j in [0, 2pi), the number of
eigenphases that wrap through 0 between x_a and x_b is
``round((sum theta(x_a) - sum theta(x_b)) / 2pi)`` as long as arg det S
moves by less than pi over the step. The scan step is chosen from the
scattering matrix's phase-rate bound so this always holds; bisection on the
same count isolates every root with its multiplicity.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .scattering import BondScattering

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-9


class SpectrumError(ValueError):
    pass


class KramersViolation(SpectrumError):
    def __init__(self, k: float, mult: int):
        super().__init__(f"odd multiplicity {mult} at k={k:.12g}")
        self.k = k
        self.multiplicity = mult


@dataclass
class Spectrum:
    k: np.ndarray
    multiplicity: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=float)
        self.multiplicity = np.asarray(self.multiplicity, dtype=int)
        if len(self.k) > 1 and np.any(np.diff(self.k) <= 0):
            raise SpectrumError("spectrum must be strictly increasing")
        if np.any(self.multiplicity < 1):
            raise SpectrumError("multiplicities must be positive")

    def __len__(self) -> int:
        return len(self.k)

    @property
    def total(self) -> int:
        return int(self.multiplicity.sum())

    def expanded(self) -> np.ndarray:
        return np.repeat(self.k, self.multiplicity)

    def count_below(self, K: float) -> int:
        return int(self.multiplicity[self.k <= K].sum())


@dataclass
class UnfoldedSpectrum:
    x: np.ndarray
    kramers_lifted: bool
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.x)


def secular_det(S) -> complex:
    S = np.asarray(S, dtype=complex)
    return complex(np.linalg.det(np.eye(S.shape[0]) - S))


def _phase_sums(S_batch: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(S_batch)
    dev = np.max(np.abs(np.abs(ev) - 1.0))
    if dev > UNITARITY_TOL:
        raise SpectrumError(f"S is not unitary (|eigenvalue| off by {dev:.2e})")
    return np.mod(np.angle(ev), 2 * np.pi).sum(axis=-1)


def _count(theta_a: float, theta_b: float) -> int:
    return int(np.rint((theta_a - theta_b) / (2 * np.pi)))


class _Counter:
    def __init__(self, bs: BondScattering):
        self.bs = bs

    def theta(self, x: float) -> float:
        return float(_phase_sums(self.bs.S(x)[None])[0])

    def thetas(self, xs) -> np.ndarray:
        out = np.empty(len(xs))
        chunk = 256
        for i in range(0, len(xs), chunk):
            out[i:i + chunk] = _phase_sums(self.bs.S_batch(xs[i:i + chunk]))
        return out

    def refine(self, a, ta, b, tb, c, tol, out):
        while True:
            if b - a <= tol:
                out.append((0.5 * (a + b), c))
                return
            m = 0.5 * (a + b)
            tm = self.theta(m)
            cl = _count(ta, tm)
            cr = c - cl
            if cl and cr:
                self.refine(a, ta, m, tm, cl, tol, out)
                a, ta = m, tm
                c = cr
            elif cl:
                b, tb = m, tm
            else:
                a, ta = m, tm


def _scan_window(bs: BondScattering, grid: np.ndarray, tol: float) -> list[tuple[float, int]]:
    counter = _Counter(bs)
    th = counter.thetas(grid)
    roots: list[tuple[float, int]] = []
    for i in range(len(grid) - 1):
        c = _count(th[i], th[i + 1])
        if c < 0:
            logger.warning("net downward eigenphase crossing near %s=%.6g", bs.variable, grid[i])
            continue
        if c:
            counter.refine(grid[i], th[i], grid[i + 1], th[i + 1], c, tol, roots)
    return roots


def scan_grid(bs: BondScattering, k_min: float, k_max: float, step: float | None = None) -> np.ndarray:
    """Grid with arg det S changing by at most pi/2 per step."""
    if step is None:
        pts = [k_min]
        while pts[-1] < k_max:
            pts.append(pts[-1] + np.pi / (2 * bs.phase_rate(pts[-1])))
        pts[-1] = k_max
        return np.array(pts)
    n = max(1, int(np.ceil((k_max - k_min) / step)))
    return np.linspace(k_min, k_max, n + 1)


def cluster_roots(roots, merge_tol: float):
    roots = sorted(roots)
    ks, ms = [], []
    for k, m in roots:
        if ks and k - ks[-1][-1] < merge_tol:
            ks[-1].append(k)
            ms[-1].append(m)
        else:
            ks.append([k])
            ms.append([m])
    k_out = [float(np.average(kk, weights=mm)) for kk, mm in zip(ks, ms)]
    return np.array(k_out), np.array([sum(mm) for mm in ms], dtype=int)


def find_spectrum(bs: BondScattering, k_min: float, k_max: float, tol: float = 1e-10,
                  step: float | None = None, threads: int = 1, merge_tol: float | None = None) -> Spectrum:
    """All roots of det(I - S(x)) = 0 in (k_min, k_max] with multiplicities."""
    if not (0 < k_min < k_max):
        raise SpectrumError("need 0 < k_min < k_max")
    if tol <= 0:
        raise SpectrumError("tol must be positive")
    grid = scan_grid(bs, k_min, k_max, step)
    L = bs.meta.get("total_length", 1.0)
    if merge_tol is None:
        merge_tol = 1e-6 * np.pi / L
    merge_tol = max(merge_tol, 2 * tol)
    # the partition depends only on the grid, so results do not depend on threads
    nwin = int(min(256, max(1, len(grid) // 512)))
    cuts = np.linspace(0, len(grid) - 1, nwin + 1).astype(int)
    windows = [grid[cuts[i]:cuts[i + 1] + 1] for i in range(nwin) if cuts[i + 1] > cuts[i]]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda w: _scan_window(bs, w, tol), windows))
    else:
        parts = [_scan_window(bs, w, tol) for w in windows]
    roots = [r for part in parts for r in part]
    k, m = cluster_roots(roots, merge_tol)
    meta = {"operator": bs.operator, "variable": bs.variable, "k_min": k_min, "k_max": k_max,
            "tol": tol, "scan_points": int(len(grid)), "merge_tol": merge_tol,
            "total_length": L}
    return Spectrum(k, m, meta)


def weyl_count(K: float, L_total: float) -> float:
    """Expected number of Dirac k-levels (with multiplicity) in (0, K]."""
    return 2.0 * L_total * max(K, 0.0) / np.pi


def lift_kramers(s: Spectrum) -> Spectrum:
    odd = np.nonzero(s.multiplicity % 2)[0]
    if len(odd):
        i = odd[0]
        raise KramersViolation(float(s.k[i]), int(s.multiplicity[i]))
    return Spectrum(s.k.copy(), s.multiplicity // 2, {**s.meta, "kramers_lifted": True})


def unfold(s: Spectrum, L_total: float, validate: bool = True) -> UnfoldedSpectrum:
    """x_n = (L/pi) k_n on a Kramers-lifted spectrum (mean level density L/pi)."""
    if len(s) == 0:
        raise SpectrumError("cannot unfold an empty spectrum")
    x = (L_total / np.pi) * s.expanded()
    if validate and len(x) >= 500:
        spacing = (x[-1] - x[0]) / (len(x) - 1)
        if abs(spacing - 1) > 0.02:
            raise SpectrumError(f"unfolded mean spacing {spacing:.4f} is not 1 +- 2%")
    lifted = bool(s.meta.get("kramers_lifted", False))
    return UnfoldedSpectrum(x, lifted, {"L_total": L_total, "protocol": "kramers-lift then x = L k / pi"})


