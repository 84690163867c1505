"""Dense linear-algebra helpers for the transfer-matrix analysis."""

import logging

import numpy as np
import scipy.linalg

from . import config

log = logging.getLogger(__name__)


def start_vector(n: int) -> np.ndarray:
    """Deterministic unit start vector: all-ones tilted by a small ramp."""
    v = np.ones(n) + 1e-3 * np.arange(n) / max(n, 1)
    return v / np.linalg.norm(v)


def power_iteration(
    mat: np.ndarray, tol: float = config.POWER_ITER_TOL, maxiter: int = config.POWER_ITER_MAX
) -> tuple[float, np.ndarray, bool]:
    """Largest eigenvalue of a positive semi-definite matrix by power iteration.

    Returns:
        ``(eigenvalue, eigenvector, converged)``.
    """
    vec = start_vector(mat.shape[0])
    ev_prev = None
    ev = 0.0
    for _ in range(maxiter):
        dst = mat @ vec
        ev = float(np.linalg.norm(dst))
        if ev == 0.0:
            return 0.0, vec, True
        vec = dst / ev
        if ev_prev is not None and abs(ev - ev_prev) < tol * ev:
            return ev, vec, True
        ev_prev = ev
    return ev, vec, False


def operator_norm(a: np.ndarray, tol: float = config.POWER_ITER_TOL, maxiter: int = config.POWER_ITER_MAX) -> float:
    """Largest singular value of ``a`` via power iteration on a^T a."""
    a = np.asarray(a, dtype=float)
    if not a.size:
        return 0.0
    ev, _, converged = power_iteration(a.T @ a, tol, maxiter)
    if not converged:
        log.warning('operator norm power iteration did not converge in %d steps', maxiter)
    return float(np.sqrt(ev))


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 'fro'))


def spectrum(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a real, possibly nonsymmetric matrix."""
    return scipy.linalg.eig(a)


def apply_power(a: np.ndarray, vec: np.ndarray, k: int) -> np.ndarray:
    """Return a^k vec by repeated multiplication."""
    out = np.asarray(vec, dtype=float)
    for _ in range(k):
        out = a @ out
    return out
