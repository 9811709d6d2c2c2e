"""Density matrices, bipartite structure and random-state sampling.

Composite indices follow ``i = i_A * d_B + i_B``: subsystem A is the slow
index, which matches ``np.kron(rho_a, rho_b)``.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Any, Literal

import numpy as np

from .errors import DimensionError, FormatError, StateValidationError
from .linalg import dag, hermitize
from .serialize import decode_matrix, decode_vector, encode_matrix, encode_vector

Side = Literal["A", "B"]

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-10


@dataclass(frozen=True)
class Tolerances:
    herm: float = HERM_TOL
    trace: float = TRACE_TOL
    psd: float = PSD_TOL


@dataclass(frozen=True)
class Violation:
    invariant: str  # "hermiticity" | "trace" | "psd"
    magnitude: float

    def __str__(self) -> str:
        return f"{self.invariant} violated by {self.magnitude:.3g}"


def _frozen(m: np.ndarray) -> np.ndarray:
    a = np.array(m, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def validate_state(m: Any, tolerances: Tolerances | None = None) -> list[Violation]:
    """Check hermiticity, unit trace and positivity of ``m``.

    Returns the violated invariants with the measured magnitude of each
    violation; an empty list means ``m`` is a valid density matrix.
    """
    tol = tolerances or Tolerances()
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"density matrix must be square, got shape {m.shape}")
    out = []
    herm = float(np.max(np.abs(m - dag(m))))
    if herm > tol.herm:
        out.append(Violation("hermiticity", herm))
    tr_err = abs(complex(np.trace(m)) - 1.0)
    if tr_err > tol.trace:
        out.append(Violation("trace", tr_err))
    min_eig = float(np.linalg.eigvalsh(hermitize(m))[0])
    if min_eig < -tol.psd:
        out.append(Violation("psd", -min_eig))
    return out


def _raise_if_invalid(m: np.ndarray, tolerances: Tolerances | None, what: str) -> None:
    violations = validate_state(m, tolerances)
    if violations:
        detail = "; ".join(str(v) for v in violations)
        raise StateValidationError(f"invalid {what}: {detail}", violations)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable density matrix; validated on construction unless ``check=False``."""

    matrix: np.ndarray
    check: InitVar[bool] = True
    tolerances: InitVar[Tolerances | None] = None

    def __post_init__(self, check: bool, tolerances: Tolerances | None) -> None:
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        if check:
            _raise_if_invalid(m, tolerances, "density matrix")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def allclose(self, other: "DensityMatrix | np.ndarray", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, as_matrix(other), rtol=0.0, atol=atol))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    state: DensityMatrix
    dim_a: int
    dim_b: int

    def __post_init__(self) -> None:
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionError("subsystem dimensions must be positive")
        if self.dim_a * self.dim_b != self.state.dim:
            raise DimensionError(
                f"dim_a * dim_b = {self.dim_a * self.dim_b} does not match state dimension {self.state.dim}"
            )

    @classmethod
    def from_matrix(cls, m: Any, dim_a: int, dim_b: int, check: bool = True) -> "BipartiteState":
        return cls(DensityMatrix(np.asarray(m), check=check), dim_a, dim_b)

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_a, self.dim_b

    def marginal(self, keep: Side) -> DensityMatrix:
        return partial_trace(self, keep)

    def swapped(self) -> "BipartiteState":
        """The same state with the roles of A and B exchanged."""
        t = self.matrix.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)
        m = t.transpose(1, 0, 3, 2).reshape(self.state.dim, self.state.dim)
        return BipartiteState(DensityMatrix(m, check=False), self.dim_b, self.dim_a)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex).ravel()
        err = abs(np.linalg.norm(v) - 1.0)
        if err > NORM_TOL:
            raise StateValidationError(
                f"invalid pure state: norm deviates from 1 by {err:.3g}", [Violation("norm", err)]
            )
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def as_matrix(x: "DensityMatrix | BipartiteState | np.ndarray") -> np.ndarray:
    if isinstance(x, BipartiteState):
        return x.matrix
    if isinstance(x, DensityMatrix):
        return x.matrix
    return np.asarray(x, dtype=complex)


def tensor(a: DensityMatrix, b: DensityMatrix) -> BipartiteState:
    for label, x in (("first", a), ("second", b)):
        _raise_if_invalid(as_matrix(x), None, f"{label} factor")
    ma, mb = as_matrix(a), as_matrix(b)
    return BipartiteState(DensityMatrix(np.kron(ma, mb), check=False), ma.shape[0], mb.shape[0])


def partial_trace_array(m: np.ndarray, dim_a: int, dim_b: int, keep: Side) -> np.ndarray:
    m = np.asarray(m)
    if m.shape != (dim_a * dim_b, dim_a * dim_b):
        raise DimensionError(f"matrix of shape {m.shape} is not {dim_a}x{dim_b} bipartite")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ajbj->ab", t)
    if keep == "B":
        return np.einsum("iaib->ab", t)
    raise ValueError(f"subsystem label must be 'A' or 'B', got {keep!r}")


def partial_trace(s: BipartiteState, keep: Side) -> DensityMatrix:
    """Reduced state of subsystem ``keep``."""
    reduced = partial_trace_array(s.matrix, s.dim_a, s.dim_b, keep)
    return DensityMatrix(hermitize(reduced), check=False)


def pure_to_density(v: "PureState | np.ndarray") -> DensityMatrix:
    amps = v.amplitudes if isinstance(v, PureState) else PureState(np.asarray(v)).amplitudes
    return DensityMatrix(np.outer(amps, amps.conj()), check=False)


def random_density(dim: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """Ginibre-style random state: G G† / tr(G G†) with G of shape dim x rank."""
    if dim < 1:
        raise ValueError("dim must be positive")
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dag(g)
    rho = hermitize(rho / np.trace(rho).real)
    return DensityMatrix(rho, check=False)


def random_pure(dim: int, seed=None) -> PureState:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_bipartite(dim_a: int, dim_b: int, rank: int | None = None, seed=None) -> BipartiteState:
    return BipartiteState(random_density(dim_a * dim_b, rank, seed), dim_a, dim_b)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim, check=False)


def basis_projector(dim: int, i: int) -> DensityMatrix:
    m = np.zeros((dim, dim), dtype=complex)
    m[i, i] = 1.0
    return DensityMatrix(m, check=False)


def bell_state() -> BipartiteState:
    """(|00> + |11>)/sqrt(2) as a two-qubit density matrix."""
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return BipartiteState(pure_to_density(psi), 2, 2)


def werner_state(p: float) -> BipartiteState:
    """p |Phi+><Phi+| + (1 - p) I/4."""
    m = p * bell_state().matrix + (1 - p) * np.eye(4) / 4
    return BipartiteState(DensityMatrix(m), 2, 2)


# -- file format ---------------------------------------------------------------

def state_to_json(s: "BipartiteState | PureState") -> dict:
    if isinstance(s, PureState):
        return {"dim": s.dim, "amplitudes": encode_vector(s.amplitudes)}
    return {"dim_a": s.dim_a, "dim_b": s.dim_b, "matrix": encode_matrix(s.matrix)}


def state_from_json(data: dict, check: bool = True) -> "BipartiteState | PureState":
    """Parse the state file layout.

    Mixed states carry ``dim_a``, ``dim_b`` and ``matrix``; pure states carry
    ``dim`` and ``amplitudes``. A pure state with a ``dim_a``/``dim_b`` pair is
    returned as a bipartite density matrix.
    """
    if not isinstance(data, dict):
        raise FormatError("state file must contain a JSON object")
    if "amplitudes" in data:
        amps = decode_vector(data["amplitudes"])
        if "dim" in data and int(data["dim"]) != amps.shape[0]:
            raise DimensionError(f"declared dim {data['dim']} but {amps.shape[0]} amplitudes given")
        pure = PureState(amps)
        if "dim_a" in data and "dim_b" in data:
            return BipartiteState(pure_to_density(pure), int(data["dim_a"]), int(data["dim_b"]))
        return pure
    missing = {"dim_a", "dim_b", "matrix"} - set(data)
    if missing:
        raise FormatError(f"state file is missing keys: {sorted(missing)}")
    m = decode_matrix(data["matrix"])
    return BipartiteState(DensityMatrix(m, check=check), int(data["dim_a"]), int(data["dim_b"]))
