"""Classical correlation, quantum discord and zero-discord states.

Classical correlation with respect to side X is the largest Holevo quantity
of the ensemble of conditional states that a rank-1 projective measurement on
X leaves on the other side. The measurement basis is the column set of a
unitary built from Givens rotations with phases, giving ``d^2 - d`` real
parameters for a measured side of dimension ``d``. Maximization uses
multi-start Nelder-Mead.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize

from .entropy import mutual_information, relative_entropy, von_neumann_entropy
from .errors import DimensionError, NumericalConsistencyError, OptimizationFailure
from .linalg import EIG_CUTOFF, hermitize, is_unitary
from .qstate import BipartiteState, DensityMatrix, Side, as_matrix, partial_trace_array
from .serialize import encode_matrix

HOLEVO_TOL = 1e-9
CLAMP_TOL = 1e-3
OUTCOME_CUTOFF = 1e-14


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    seed: int = 0
    max_iters: int = 500
    ftol: float = 1e-10
    xtol: float = 1e-7
    initial_step: float = 0.4
    measurement_class: str = "projective"

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.measurement_class != "projective":
            raise ValueError("only rank-1 projective measurements are supported")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "OptimizerConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown optimizer config keys: {sorted(unknown)}")
        return cls(**data)


# -- measurement parameterization ------------------------------------------

def n_angles(d: int) -> int:
    return d * d - d


def givens_unitary(d: int, angles: Sequence[float]) -> np.ndarray:
    """Product of phased Givens rotations, one (theta, phi) pair per index pair.

    Diagonal phases are dropped: they do not change rank-1 projectors.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n_angles(d),):
        raise DimensionError(f"expected {n_angles(d)} angles for d={d}, got {angles.shape}")
    u = np.eye(d, dtype=complex)
    for n, (j, k) in enumerate(combinations(range(d), 2)):
        theta, phi = angles[2 * n], angles[2 * n + 1]
        c, s = np.cos(theta), np.sin(theta)
        e = complex(np.cos(phi), np.sin(phi))
        # right-multiplication by the rotation mixes columns j and k only
        uj, uk = u[:, j].copy(), u[:, k]
        u[:, j] = c * uj + e * s * uk
        u[:, k] = c * uk - e.conjugate() * s * uj
    return u


@dataclass(frozen=True, eq=False)
class MeasurementSetting:
    """Rank-1 projective measurement {U|i><i|U^dag}."""

    rotation: np.ndarray

    def __post_init__(self) -> None:
        u = np.array(self.rotation, dtype=complex, copy=True)
        if not is_unitary(u, 1e-10):
            raise ValueError("measurement rotation must be unitary")
        u.flags.writeable = False
        object.__setattr__(self, "rotation", u)

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    @classmethod
    def computational(cls, d: int) -> "MeasurementSetting":
        return cls(np.eye(d))

    @classmethod
    def from_angles(cls, d: int, angles: Sequence[float]) -> "MeasurementSetting":
        return cls(givens_unitary(d, angles))

    def projectors(self) -> np.ndarray:
        u = self.rotation
        return np.einsum("ai,bi->iab", u, u.conj())

    def to_json(self) -> dict:
        return {"dim": self.dim, "rotation": encode_matrix(self.rotation)}


@dataclass(frozen=True)
class MeasuredEnsemble:
    """Outcome probabilities and conditional states of the unmeasured side."""

    probabilities: tuple[float, ...]
    states: tuple[DensityMatrix, ...]
    measured_side: Side
    omitted: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.probabilities) != len(self.states):
            raise DimensionError("one conditional state per probability is required")

    @property
    def outcomes(self) -> list[tuple[float, DensityMatrix]]:
        return list(zip(self.probabilities, self.states))

    def average(self) -> np.ndarray:
        return sum(p * r.matrix for p, r in self.outcomes)


def _conditional_blocks(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Unnormalized conditional states (<u_i| (x) I) rho (|u_i> (x) I), stacked over i."""
    return np.einsum("ai,abcd,ci->ibd", u.conj(), r, u)


def _in_a_frame(s: BipartiteState, side: Side) -> BipartiteState:
    if side == "A":
        return s
    if side == "B":
        return s.swapped()
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def measure_ensemble(s: BipartiteState, m: MeasurementSetting, side: Side = "A") -> MeasuredEnsemble:
    """Measure ``side`` of ``s`` with ``m``; conditional states live on the other side."""
    t = _in_a_frame(s, side)
    if m.dim != t.dim_a:
        raise DimensionError(f"measurement has dimension {m.dim}, side {side} has {t.dim_a}")
    r = t.matrix.reshape(t.dim_a, t.dim_b, t.dim_a, t.dim_b)
    blocks = _conditional_blocks(r, m.rotation)
    probs, states, omitted = [], [], []
    for i, block in enumerate(blocks):
        p = float(np.real(np.trace(block)))
        if p <= OUTCOME_CUTOFF:
            omitted.append(i)
            continue
        probs.append(p)
        states.append(DensityMatrix(hermitize(block / p), check=False))
    return MeasuredEnsemble(tuple(probs), tuple(states), side, tuple(omitted))


def holevo_value(e: MeasuredEnsemble, tol: float = HOLEVO_TOL) -> float:
    """S(avg) - sum p_i S(rho_i), checked against sum p_i S(rho_i || avg)."""
    avg = e.average()
    entropy_form = von_neumann_entropy(avg) - sum(p * von_neumann_entropy(r) for p, r in e.outcomes)
    relative_form = sum(p * relative_entropy(r, avg) for p, r in e.outcomes)
    if not abs(entropy_form - relative_form) <= tol:
        raise NumericalConsistencyError(
            f"Holevo forms disagree: {entropy_form!r} vs {relative_form!r}"
        )
    return max(entropy_form, 0.0)


# -- optimization ------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationResult:
    value: float
    best_measurement: MeasurementSetting
    restarts_used: int
    spread: float
    side: Side = "A"
    measurement_class: str = "projective"
    restart_values: tuple[float, ...] = field(default=(), repr=False)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "side": self.side,
            "measurement_class": self.measurement_class,
            "restarts_used": self.restarts_used,
            "spread": self.spread,
            "best_measurement": self.best_measurement.to_json(),
        }


class _HolevoObjective:
    """Negative Holevo quantity as a function of the Givens angles.

    Evaluates the entropy-difference form directly on the spectra of the
    unnormalized conditional blocks.
    """

    def __init__(self, t: BipartiteState):
        self.d = t.dim_a
        self.r = t.matrix.reshape(t.dim_a, t.dim_b, t.dim_a, t.dim_b)
        self.s_other = von_neumann_entropy(partial_trace_array(t.matrix, t.dim_a, t.dim_b, "B"))

    def holevo(self, u: np.ndarray) -> float:
        # eigvalsh reads one triangle, so rounding asymmetry is harmless here
        mu = np.linalg.eigvalsh(_conditional_blocks(self.r, u))
        p = mu.sum(axis=1)
        mu = mu[mu > EIG_CUTOFF]
        p = p[p > EIG_CUTOFF]
        return self.s_other + float(np.sum(mu * np.log2(mu))) - float(np.sum(p * np.log2(p)))

    def __call__(self, angles: np.ndarray) -> float:
        return -self.holevo(givens_unitary(self.d, angles))


def _start_point(restart: int, n: int, seed: int) -> np.ndarray:
    if restart == 0:
        return np.zeros(n)
    rng = np.random.default_rng([seed, restart])
    x = np.empty(n)
    x[0::2] = rng.uniform(0.0, np.pi, n // 2)
    x[1::2] = rng.uniform(0.0, 2 * np.pi, n // 2)
    return x


def classical_correlation(
    s: BipartiteState, side: Side = "A", cfg: OptimizerConfig | None = None
) -> CorrelationResult:
    """Maximize the Holevo quantity over projective measurements on ``side``.

    Restart 0 starts from the computational basis; the others from angles
    drawn with ``(cfg.seed, restart)``. The best restart wins, ties going to
    the lowest index.
    """
    cfg = cfg or OptimizerConfig()
    t = _in_a_frame(s, side)
    d = t.dim_a
    n = n_angles(d)
    if n == 0:
        setting = MeasurementSetting.computational(d)
        value = holevo_value(measure_ensemble(t, setting, "A"))
        return CorrelationResult(value, setting, 1, 0.0, side, cfg.measurement_class, (value,))

    objective = _HolevoObjective(t)
    optima, points = [], []
    for restart in range(cfg.restarts):
        x0 = _start_point(restart, n, cfg.seed)
        simplex = np.vstack([x0, x0 + cfg.initial_step * np.eye(n)])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iters,
                "xatol": cfg.xtol,
                "fatol": cfg.ftol,
                "initial_simplex": simplex,
            },
        )
        optima.append(-float(res.fun))
        points.append(res.x)
    best = int(np.argmax(optima))
    setting = MeasurementSetting.from_angles(d, points[best])
    value = holevo_value(measure_ensemble(t, setting, "A"))
    return CorrelationResult(
        value=value,
        best_measurement=setting,
        restarts_used=cfg.restarts,
        spread=float(max(optima) - min(optima)),
        side=side,
        measurement_class=cfg.measurement_class,
        restart_values=tuple(optima),
    )


@dataclass(frozen=True)
class DiscordResult:
    value: float
    mutual_information: float
    classical: CorrelationResult
    raw: float  # I - C before clamping

    @property
    def side(self) -> Side:
        return self.classical.side

    def to_json(self) -> dict:
        return {
            "I": self.mutual_information,
            "C": self.classical.value,
            "D": self.value,
            "side": self.side,
            "best_measurement": self.classical.best_measurement.to_json(),
            "spread": self.classical.spread,
            "restarts_used": self.classical.restarts_used,
            "measurement_class": self.classical.measurement_class,
        }


def quantum_discord(
    s: BipartiteState,
    side: Side = "A",
    cfg: OptimizerConfig | None = None,
    clamp_tol: float = CLAMP_TOL,
) -> DiscordResult:
    """D = I - C with measurement on ``side``; small negatives are clamped to 0."""
    info = mutual_information(s)
    corr = classical_correlation(s, side, cfg)
    raw = info - corr.value
    if raw < -clamp_tol:
        raise OptimizationFailure(
            f"discord evaluated to {raw:.3e}: classical correlation {corr.value!r} exceeds I={info!r}"
        )
    return DiscordResult(max(raw, 0.0), info, corr, raw)


def classical_quantum_state(
    probs: Sequence[float], basis: Any, states: Sequence[Any]
) -> BipartiteState:
    """sum_i p_i |b_i><b_i| (x) rho_i for orthonormal columns b_i of ``basis``.

    ``basis=None`` selects the computational basis of dimension ``len(probs)``.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"invalid probability vector {list(p)}")
    b = np.eye(len(p), dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    if b.shape != (len(p), len(p)):
        raise DimensionError(f"{len(p)} probabilities but basis of shape {b.shape}")
    if len(states) != len(p):
        raise DimensionError(f"{len(p)} probabilities but {len(states)} conditional states")
    if not is_unitary(b, 1e-10):
        raise ValueError("basis columns must be orthonormal")
    mats = [DensityMatrix(as_matrix(r)).matrix for r in states]
    db = mats[0].shape[0]
    if any(m.shape != (db, db) for m in mats):
        raise DimensionError("conditional states must share one dimension")
    rho = sum(pi * np.kron(np.outer(b[:, i], b[:, i].conj()), m) for i, (pi, m) in enumerate(zip(p, mats)))
    return BipartiteState(DensityMatrix(hermitize(rho)), b.shape[0], db)
