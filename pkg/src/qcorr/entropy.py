"""Von Neumann entropy, relative entropy and mutual information, in bits."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, NumericalConsistencyError
from .linalg import EIG_CUTOFF, hermitize
from .qstate import BipartiteState, as_matrix, partial_trace_array

SUPPORT_TOL = 1e-10
XCHECK_TOL = 1e-9
EPS_ROUND = 1e-9


def _clamp(bits: float) -> float:
    if bits < -EPS_ROUND:
        raise NumericalConsistencyError(f"entropic quantity evaluated to {bits:.3e} < 0")
    return max(bits, 0.0)


def entropy_of_spectrum(eigs: np.ndarray, cutoff: float = EIG_CUTOFF) -> float:
    """Shannon entropy -sum p log2 p of the entries above ``cutoff``."""
    p = np.asarray(eigs, dtype=float)
    p = p[p > cutoff]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    m = hermitize(as_matrix(rho))
    return _clamp(entropy_of_spectrum(np.linalg.eigvalsh(m)))


def relative_entropy(rho, sigma) -> float:
    """S(rho || sigma) = -S(rho) - tr(rho log2 sigma).

    Evaluated in the eigenbasis of ``sigma``. Returns ``math.inf`` when the
    weight of ``rho`` on the kernel of ``sigma`` exceeds the support tolerance.
    """
    r = hermitize(as_matrix(rho))
    s = hermitize(as_matrix(sigma))
    if r.shape != s.shape:
        raise DimensionError(f"relative entropy of shapes {r.shape} and {s.shape}")
    w, v = np.linalg.eigh(s)
    diag = np.real(np.einsum("ki,kl,li->i", v.conj(), r, v))
    kernel = w <= EIG_CUTOFF
    if np.sum(diag[kernel]) > SUPPORT_TOL:
        return math.inf
    cross = float(np.sum(diag[~kernel] * np.log2(w[~kernel])))
    neg_entropy = -entropy_of_spectrum(np.linalg.eigvalsh(r))
    return _clamp(neg_entropy - cross)


def mutual_information(s: BipartiteState, xcheck_tol: float = XCHECK_TOL) -> float:
    """I(A:B) = S(A) + S(B) - S(AB), cross-checked against S(rho_AB || rho_A (x) rho_B)."""
    m = s.matrix
    rho_a = partial_trace_array(m, s.dim_a, s.dim_b, "A")
    rho_b = partial_trace_array(m, s.dim_a, s.dim_b, "B")
    additive = von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(m)
    relative = relative_entropy(m, np.kron(rho_a, rho_b))
    if not abs(additive - relative) <= xcheck_tol:
        raise NumericalConsistencyError(
            f"mutual information forms disagree: additive={additive!r}, relative={relative!r}"
        )
    return _clamp(additive)

