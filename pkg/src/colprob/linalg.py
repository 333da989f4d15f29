"""Small symmetric linear algebra and the standard normal CDF."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import NonPSDError, SingularMatrixError

PSD_CLAMP_TOL = 1e-9
SINGULAR_DET_TOL = 1e-15


class EigenDecomp2(NamedTuple):
    """Eigenvalues sorted descending and matching column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def eig_sym2(m) -> EigenDecomp2:
    """Closed-form eigendecomposition of a symmetric 2x2 matrix."""
    m = np.asarray(m, dtype=float)
    a, b, d = m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]
    mean = 0.5 * (a + d)
    half_diff = 0.5 * (a - d)
    radius = math.hypot(half_diff, b)
    l1, l2 = mean + radius, mean - radius
    if radius == 0.0:
        vecs = np.eye(2)
    else:
        # eigenvector angle of the larger eigenvalue
        phi = 0.5 * math.atan2(2.0 * b, a - d)
        c, s = math.cos(phi), math.sin(phi)
        vecs = np.array([[c, -s], [s, c]])
    return EigenDecomp2(np.array([l1, l2]), vecs)


def eig_sym2_batch(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`eig_sym2` over a ``(K, 2, 2)`` stack."""
    a = m[:, 0, 0]
    b = 0.5 * (m[:, 0, 1] + m[:, 1, 0])
    d = m[:, 1, 1]
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), b)
    values = np.stack([mean + radius, mean - radius], axis=1)
    phi = 0.5 * np.arctan2(2.0 * b, a - d)
    c, s = np.cos(phi), np.sin(phi)
    vecs = np.empty_like(m)
    vecs[:, 0, 0], vecs[:, 0, 1] = c, -s
    vecs[:, 1, 0], vecs[:, 1, 1] = s, c
    return values, vecs


def _clamped_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    vals, vecs = np.linalg.eigh(sym)
    if np.any(vals < -PSD_CLAMP_TOL):
        raise NonPSDError(f"matrix is not PSD (min eigenvalue {vals.min():.3e})")
    return np.clip(vals, 0.0, None), vecs


def sqrt_sym3(m) -> np.ndarray:
    """Principal (symmetric PSD) square root of a symmetric PSD matrix.

    Eigenvalues down to -1e-9 are clamped to zero; anything more negative
    raises :class:`NonPSDError`.
    """
    vals, vecs = _clamped_eigh(np.asarray(m, dtype=float))
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return 0.5 * (root + root.T)


def sqrt_sym3_batch(m: np.ndarray) -> np.ndarray:
    """Principal square roots of a ``(K, n, n)`` stack."""
    vals, vecs = _clamped_eigh(np.asarray(m, dtype=float))
    root = (vecs * np.sqrt(vals)[:, None, :]) @ np.swapaxes(vecs, -1, -2)
    return 0.5 * (root + np.swapaxes(root, -1, -2))


def inv_sym3(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    det = np.linalg.det(m)
    if abs(det) <= SINGULAR_DET_TOL:
        raise SingularMatrixError(f"matrix is singular (det={det:.3e})")
    inv = np.linalg.inv(m)
    return 0.5 * (inv + inv.T)


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function.

    The erfc form keeps full relative precision in both tails.
    """
    return 0.5 * math.erfc(-z / math.sqrt(2.0))
