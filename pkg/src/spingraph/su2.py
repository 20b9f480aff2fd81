"""SU(2) helpers: Pauli matrices, validity checks, Haar sampling."""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
J = np.array([[0, 1], [-1, 0]], dtype=complex)

SU2_TOL = 1e-12


def from_quaternion(q) -> np.ndarray:
    """Map a unit quaternion (a, b, c, d) to [[a+ib, c+id], [-c+id, a-ib]]."""
    a, b, c, d = (float(x) for x in q)
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def to_quaternion(u: np.ndarray) -> np.ndarray:
    return np.array([u[0, 0].real, u[0, 0].imag, u[0, 1].real, u[0, 1].imag])


def is_su2(u: np.ndarray, tol: float = SU2_TOL) -> bool:
    u = np.asarray(u)
    if u.shape != (2, 2):
        return False
    unitary = np.linalg.norm(u.conj().T @ u - I2) <= tol
    return bool(unitary and abs(np.linalg.det(u) - 1.0) <= tol)


def su2_inverse(u: np.ndarray) -> np.ndarray:
    return u.conj().T


def haar_su2(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw Haar-distributed SU(2) elements.

    A standard normal 4-vector normalised onto the 3-sphere is uniform there,
    and the quaternion map carries that measure to the Haar measure.
    Returns a (2, 2) array, or (size, 2, 2) when ``size`` is given.
    """
    n = 1 if size is None else int(size)
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    u = np.empty((n, 2, 2), dtype=complex)
    u[:, 0, 0] = q[:, 0] + 1j * q[:, 1]
    u[:, 0, 1] = q[:, 2] + 1j * q[:, 3]
    u[:, 1, 0] = -q[:, 2] + 1j * q[:, 3]
    u[:, 1, 1] = q[:, 0] - 1j * q[:, 1]
    return u[0] if size is None else u


def spin_rotation(axis, angle: float) -> np.ndarray:
    """exp(-i angle/2 n.sigma) for a unit axis n."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * ns


def expi_involution(theta: float, m: np.ndarray) -> np.ndarray:
    """exp(-i theta M) for a Hermitian involution M (M @ M = I)."""
    return np.cos(theta) * I2 - 1j * np.sin(theta) * m


def semicircle_cdf(x):
    """CDF of tr(u)/2 under Haar measure, density (2/pi) sqrt(1 - x^2)."""
    x = np.clip(x, -1.0, 1.0)
    return 0.5 + (x * np.sqrt(1 - x**2) + np.arcsin(x)) / np.pi
