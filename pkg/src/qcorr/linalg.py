"""Small dense linear-algebra helpers used across the package."""

from __future__ import annotations

import numpy as np

EIG_CUTOFF = 1e-12


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return (m + m†)/2."""
    return 0.5 * (m + dag(m))


def spectral_power(m: np.ndarray, power: float, cutoff: float = EIG_CUTOFF) -> np.ndarray:
    """Apply ``x -> x**power`` to the spectrum of a Hermitian PSD matrix.

    Eigenvalues at or below ``cutoff`` are mapped to zero, so negative powers
    act as the inverse on the support only.
    """
    w, v = np.linalg.eigh(hermitize(m))
    out = np.zeros_like(w)
    keep = w > cutoff
    out[keep] = w[keep] ** power
    return (v * out) @ dag(v)


def support_projector(m: np.ndarray, cutoff: float = EIG_CUTOFF) -> np.ndarray:
    w, v = np.linalg.eigh(hermitize(m))
    vs = v[:, w > cutoff]
    return vs @ dag(vs)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    return np.asarray(v).reshape((rows, rows if cols is None else cols), order="F")


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dag(u) @ u - np.eye(u.shape[0]))) <= tol)
