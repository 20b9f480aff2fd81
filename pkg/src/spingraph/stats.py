"""Spacing statistics, Wigner-surmise references, RMT form-factor series and form-factor estimates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammainc

from .spectrum import UnfoldedSpectrum

ENSEMBLES = ("GOE", "GSE")

# tau^m coefficients of K_GSE(tau) for m = 1..4
GSE_SERIES = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 12))
# coefficients of (1/2) K_GOE(tau/2), as displayed next to the GSE series
HALF_GOE_HALF_TAU = (Fraction(1, 2), Fraction(-1, 4), Fraction(1, 8), Fraction(-1, 12))


class StatsError(ValueError):
    pass


def goe_series_coefficients() -> tuple[Fraction, ...]:
    """K_GOE coefficients from (1/2) K_GOE(tau/2): g_m = 2^(m+1) c_m."""
    return tuple(c * 2 ** (m + 1) for m, c in enumerate(HALF_GOE_HALF_TAU, start=1))


def series_coefficients(ensemble: str) -> tuple[Fraction, ...]:
    ensemble = _ens(ensemble)
    return GSE_SERIES if ensemble == "GSE" else goe_series_coefficients()


def rmt_series(ensemble: str, tau, order: int = 4):
    """Partial sum of the small-tau form-factor series up to tau^order (order <= 4)."""
    if not 1 <= order <= 4:
        raise StatsError("order must be between 1 and 4")
    tau = np.asarray(tau, dtype=float)
    if np.any((tau < 0) | (tau >= 1)):
        raise StatsError("series is valid only for 0 <= tau < 1")
    coef = series_coefficients(ensemble)
    return sum(float(c) * tau ** m for m, c in enumerate(coef[:order], start=1))


def series_relation_holds() -> list[bool]:
    """K^m_GSE == (-1/2)^(m+1) K^m_GOE for m = 1..4, in exact rationals."""
    goe = goe_series_coefficients()
    return [GSE_SERIES[m - 1] == Fraction(-1, 2) ** (m + 1) * goe[m - 1] for m in range(1, 5)]


def _ens(ensemble: str) -> str:
    e = ensemble.upper()
    if e not in ENSEMBLES:
        raise StatsError(f"unknown ensemble {ensemble!r}")
    return e


_GSE_A = 2**18 / (3**6 * np.pi**3)
_GSE_B = 64 / (9 * np.pi)


def rmt_reference(ensemble: str, s):
    """Wigner-surmise spacing density."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise StatsError("spacing must be nonnegative")
    if _ens(ensemble) == "GOE":
        return np.pi / 2 * s * np.exp(-np.pi * s**2 / 4)
    return _GSE_A * s**4 * np.exp(-_GSE_B * s**2)


def rmt_cdf(ensemble: str, s):
    """Integrated surmise; both are regularised incomplete gamma functions of s^2."""
    s = np.clip(np.asarray(s, dtype=float), 0, None)
    if _ens(ensemble) == "GOE":
        return gammainc(1.0, np.pi * s**2 / 4)
    return gammainc(2.5, _GSE_B * s**2)


def sample_surmise(ensemble: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the surmise."""
    from scipy.special import gammaincinv
    u = rng.random(n)
    if _ens(ensemble) == "GOE":
        return np.sqrt(gammaincinv(1.0, u) * 4 / np.pi)
    return np.sqrt(gammaincinv(2.5, u) / _GSE_B)


@dataclass
class SpacingSample:
    spacings: np.ndarray
    bin_edges: np.ndarray
    hist: np.ndarray

    def cdf(self, s):
        """Empirical integrated distribution at s."""
        srt = np.sort(self.spacings)
        return np.searchsorted(srt, s, side="right") / len(srt)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def nns_statistics(u: UnfoldedSpectrum | np.ndarray, bins: int = 40, s_max: float = 4.0) -> SpacingSample:
    x = np.sort(np.asarray(u.x if isinstance(u, UnfoldedSpectrum) else u, dtype=float))
    if len(x) < 2:
        raise StatsError("need at least two levels")
    s = np.diff(x)
    hist, edges = np.histogram(s, bins=bins, range=(0.0, s_max), density=False)
    hist = hist / (len(s) * (edges[1] - edges[0]))
    return SpacingSample(s, edges, hist)


def ks_distance(sample: SpacingSample | np.ndarray, ensemble) -> float:
    """Sup-norm distance between the empirical spacing CDF and a reference.

    ``ensemble`` is "GOE"/"GSE", a CDF callable, or another sample.
    """
    s = np.sort(sample.spacings if isinstance(sample, SpacingSample) else np.asarray(sample, float))
    if len(s) == 0:
        raise StatsError("empty sample")
    n = len(s)
    if isinstance(ensemble, (SpacingSample, np.ndarray)):
        t = np.sort(ensemble.spacings if isinstance(ensemble, SpacingSample) else ensemble)
        pts = np.concatenate([s, t])
        fa = np.searchsorted(s, pts, side="right") / n
        fb = np.searchsorted(t, pts, side="right") / len(t)
        return float(np.max(np.abs(fa - fb)))
    cdf = ensemble if callable(ensemble) else (lambda z: rmt_cdf(ensemble, z))
    F = cdf(s)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


@dataclass
class FormFactorEstimate:
    tau: np.ndarray
    K: np.ndarray
    windows: int
    levels_per_window: int


def form_factor_from_spectrum(u: UnfoldedSpectrum | np.ndarray, tau, window_count: int = 16) -> FormFactorEstimate:
    """Windowed form factor |sum_n w_n exp(2 pi i x_n tau)|^2 / sum_n w_n^2.

    Each window is Hann-tapered so the mean-density peak at tau = 0 does not
    leak into small tau; the estimates are averaged over windows.
    """
    x = np.sort(np.asarray(u.x if isinstance(u, UnfoldedSpectrum) else u, dtype=float))
    if len(x) < 1000:
        raise StatsError("form factor estimate needs at least 1000 levels")
    if window_count < 8:
        raise StatsError("need at least 8 windows")
    tau = np.asarray(tau, dtype=float)
    per = len(x) // window_count
    K = np.zeros_like(tau)
    for w in range(window_count):
        xw = x[w * per:(w + 1) * per]
        xw = xw - xw[0]
        span = xw[-1]
        wt = np.sin(np.pi * xw / span) ** 2
        amp = np.exp(2j * np.pi * np.outer(tau, xw)) @ wt
        K += np.abs(amp) ** 2 / np.sum(wt**2)
    return FormFactorEstimate(tau, K / window_count, window_count, per)


def slope_through_origin(tau, K) -> float:
    tau = np.asarray(tau, float)
    return float(np.dot(tau, K) / np.dot(tau, tau))
