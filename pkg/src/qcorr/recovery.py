"""Petz recovery map and the relative-entropy sufficiency check."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import KrausChannel, apply_array
from .entropy import relative_entropy
from .errors import DimensionError, SingularityError, UnsupportedInstanceError
from .linalg import EIG_CUTOFF, dag, hermitize, spectral_power, support_projector, trace_norm
from .qstate import as_matrix

EQUALITY_TOL = 1e-9
RECOVERY_TOL = 1e-6


def trace_distance(rho, sigma) -> float:
    """(1/2) ||rho - sigma||_1."""
    return 0.5 * trace_norm(as_matrix(rho) - as_matrix(sigma))


def petz_map(ch: KrausChannel, sigma) -> KrausChannel:
    """Petz recovery channel of ``ch`` with reference state ``sigma``.

    Kraus operators are ``sigma^{1/2} K_i^dag (T sigma)^{-1/2}``. The inverse
    square root acts on the support of ``T sigma`` only, so when ``T sigma`` is
    singular the returned map annihilates the orthogonal complement and is
    trace preserving on the support alone.
    """
    s = hermitize(as_matrix(sigma))
    if s.shape != (ch.dim_in, ch.dim_in):
        raise DimensionError(f"reference state has shape {s.shape}, channel input is {ch.dim_in}")
    t_sigma = hermitize(apply_array(ch, s))
    if np.all(np.linalg.eigvalsh(t_sigma) <= EIG_CUTOFF):
        raise SingularityError("image of the reference state vanishes")
    s_half = spectral_power(s, 0.5)
    t_inv_half = spectral_power(t_sigma, -0.5)
    ops = tuple(s_half @ dag(k) @ t_inv_half for k in ch.kraus_ops)
    return KrausChannel(ch.dim_out, ch.dim_in, ops, f"petz[{ch.name}]")


def is_support_restricted(ch: KrausChannel, sigma) -> bool:
    """True when ``T sigma`` is rank deficient, so the Petz map only recovers on its support."""
    t_sigma = apply_array(ch, as_matrix(sigma))
    return not np.allclose(support_projector(t_sigma), np.eye(ch.dim_out), atol=1e-10)


@dataclass(frozen=True)
class SufficiencyReport:
    s_before: float
    s_after: float
    gap: float
    rho_recovered: bool
    sigma_recovered: bool
    recovery_error_rho: float
    recovery_error_sigma: float
    support_restricted: bool = False
    equality_tol: float = EQUALITY_TOL
    recovery_tol: float = RECOVERY_TOL

    @property
    def equality(self) -> bool:
        return self.gap <= self.equality_tol

    def to_json(self) -> dict:
        return asdict(self)


def check_sufficiency(
    ch: KrausChannel,
    rho,
    sigma,
    equality_tol: float = EQUALITY_TOL,
    recovery_tol: float = RECOVERY_TOL,
) -> SufficiencyReport:
    """Compare S(rho||sigma) with S(T rho||T sigma) and test Petz recovery of both states."""
    r = as_matrix(rho)
    s = as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"states of shapes {r.shape} and {s.shape}")
    before = relative_entropy(r, s)
    if math.isinf(before):
        raise UnsupportedInstanceError("S(rho||sigma) is infinite: supp(rho) is not inside supp(sigma)")
    t_rho = hermitize(apply_array(ch, r))
    t_sigma = hermitize(apply_array(ch, s))
    after = relative_entropy(t_rho, t_sigma)
    recovery = petz_map(ch, s)
    err_rho = trace_distance(apply_array(recovery, t_rho), r)
    err_sigma = trace_distance(apply_array(recovery, t_sigma), s)
    return SufficiencyReport(
        s_before=before,
        s_after=after,
        gap=before - after,
        rho_recovered=err_rho <= recovery_tol,
        sigma_recovered=err_sigma <= recovery_tol,
        recovery_error_rho=err_rho,
        recovery_error_sigma=err_sigma,
        support_restricted=is_support_restricted(ch, s),
        equality_tol=equality_tol,
        recovery_tol=recovery_tol,
    )
