"""CPTP maps in Kraus form, their Choi and superoperator matrices, and a zoo
of named channels.

Superoperators use column-stacking, so ``vec(K rho K^dag) = (conj(K) (x) K) vec(rho)``.
Choi matrices are normalized states ``(L (x) id)(|Omega><Omega|)`` with
``|Omega> = sum_i |ii>/sqrt(d)``; the output factor comes first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

from .errors import (
    ChannelValidationError,
    CompletePositivityError,
    DimensionError,
    FormatError,
)
from .linalg import commutator, dag, hermitize, is_unitary
from .qstate import PSD_TOL, BipartiteState, DensityMatrix, as_matrix, random_unitary
from .serialize import decode_matrix, encode_matrix

CPTP_TOL = 1e-10
UNITARY_TOL = 1e-10
REVERSIBILITY_TOL = 1e-9
PROBE_TOL = 1e-9
PROBE_MIN_TRIALS = 20

GATES = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "H": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
}


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A linear map ``rho -> sum_i K_i rho K_i^dag``.

    Construction only checks shapes; :meth:`validate` and :func:`apply`
    enforce trace preservation.
    """

    dim_in: int
    dim_out: int
    kraus_ops: tuple[np.ndarray, ...]
    name: str = field(default="kraus", compare=False)

    def __post_init__(self) -> None:
        ops = []
        for k in self.kraus_ops:
            k = np.array(k, dtype=complex, copy=True)
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionError(
                    f"Kraus operator of shape {k.shape}, expected {(self.dim_out, self.dim_in)}"
                )
            k.flags.writeable = False
            ops.append(k)
        if not ops:
            raise DimensionError("a channel needs at least one Kraus operator")
        object.__setattr__(self, "kraus_ops", tuple(ops))

    @classmethod
    def from_ops(cls, ops: Sequence[np.ndarray], name: str = "kraus") -> "KrausChannel":
        ops = [np.asarray(k, dtype=complex) for k in ops]
        if not ops or ops[0].ndim != 2:
            raise DimensionError("Kraus operators must be a non-empty list of matrices")
        d_out, d_in = ops[0].shape
        return cls(d_in, d_out, tuple(ops), name)

    @property
    def stacked(self) -> np.ndarray:
        return np.stack(self.kraus_ops)

    def completeness_error(self) -> float:
        k = self.stacked
        return float(np.max(np.abs(np.einsum("kji,kjl->il", k.conj(), k) - np.eye(self.dim_in))))

    def validate(self, tol: float = CPTP_TOL) -> None:
        err = self.completeness_error()
        if err > tol:
            raise ChannelValidationError(
                f"channel '{self.name}' is not trace preserving: |sum K^dag K - I|_max = {err:.3g}"
            )


@dataclass(frozen=True, eq=False)
class LocalChannelPair:
    channel_a: KrausChannel
    channel_b: KrausChannel

    def __post_init__(self) -> None:
        for label, ch in (("A", self.channel_a), ("B", self.channel_b)):
            if ch.dim_in != ch.dim_out:
                raise DimensionError(
                    f"local channel on {label} must preserve dimension, got {ch.dim_in} -> {ch.dim_out}"
                )

    @property
    def dims(self) -> tuple[int, int]:
        return self.channel_a.dim_in, self.channel_b.dim_in


@dataclass(frozen=True)
class ProbeVerdict:
    status: Literal["preserves", "violates", "inconclusive"]
    trials: int
    tol: float
    max_commutator: float
    witness: tuple[np.ndarray, np.ndarray] | None = None
    witness_trial: int | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "status": self.status,
            "trials": self.trials,
            "tol": self.tol,
            "max_commutator": self.max_commutator,
        }
        if self.witness is not None:
            out["witness_trial"] = self.witness_trial
            out["witness"] = [encode_matrix(self.witness[0]), encode_matrix(self.witness[1])]
        return out


@dataclass(frozen=True)
class ChannelVerdict:
    cptp_valid: bool
    unital: bool
    linear_rank: int
    reversible_cptp: bool
    commutativity_preserving: ProbeVerdict
    completeness_error: float
    min_choi_eigenvalue: float

    def to_json(self) -> dict:
        return {
            "cptp_valid": self.cptp_valid,
            "unital": self.unital,
            "linear_rank": self.linear_rank,
            "reversible_cptp": self.reversible_cptp,
            "commutativity_preserving": self.commutativity_preserving.to_json(),
            "completeness_error": self.completeness_error,
            "min_choi_eigenvalue": self.min_choi_eigenvalue,
        }


# -- action ----------------------------------------------------------------

def apply_array(ch: KrausChannel, m: np.ndarray) -> np.ndarray:
    """Raw Kraus action without validation or symmetrization."""
    k = ch.stacked
    return np.einsum("kij,jl,kml->im", k, m, k.conj())


def apply(ch: KrausChannel, rho, check: bool = True) -> DensityMatrix:
    m = as_matrix(rho)
    if m.shape != (ch.dim_in, ch.dim_in):
        raise DimensionError(f"channel '{ch.name}' takes dimension {ch.dim_in}, state has {m.shape[0]}")
    if check:
        ch.validate()
    return DensityMatrix(hermitize(apply_array(ch, m)), check=check)


def product_channel(pair: LocalChannelPair) -> KrausChannel:
    """The channel on AB with Kraus set {A_i (x) B_j}."""
    ops = [np.kron(a, b) for a in pair.channel_a.kraus_ops for b in pair.channel_b.kraus_ops]
    return KrausChannel.from_ops(ops, name=f"{pair.channel_a.name}*{pair.channel_b.name}")


def apply_local(pair: LocalChannelPair, s: BipartiteState, check: bool = True) -> BipartiteState:
    """Apply ``channel_a (x) channel_b`` to a bipartite state.

    Applied factor by factor on the reshaped tensor, which avoids building the
    product Kraus set.
    """
    if pair.dims != s.dims:
        raise DimensionError(f"channel pair acts on {pair.dims}, state is {s.dims}")
    if check:
        pair.channel_a.validate()
        pair.channel_b.validate()
    da, db = s.dims
    t = s.matrix.reshape(da, db, da, db)
    a = pair.channel_a.stacked
    b = pair.channel_b.stacked
    t = np.einsum("kia,ajbl,kcb->ijcl", a, t, a.conj())
    t = np.einsum("kjb,ibcl,kdl->ijcd", b, t, b.conj())
    m = hermitize(t.reshape(da * db, da * db))
    return BipartiteState(DensityMatrix(m, check=check), da, db)


# -- representations -------------------------------------------------------

def superoperator_matrix(ch: KrausChannel) -> np.ndarray:
    """M = sum_i conj(K_i) (x) K_i, acting on column-stacked vectors."""
    return sum(np.kron(k.conj(), k) for k in ch.kraus_ops)


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    d_in = ch.dim_in
    vecs = ch.stacked.reshape(len(ch.kraus_ops), -1)  # row-major: (out, in)
    return hermitize(np.einsum("ka,kb->ab", vecs, vecs.conj()) / d_in)


def superoperator_to_choi(m: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    t = np.asarray(m).reshape(dim_out, dim_out, dim_in, dim_in)  # [o', o, i', i]
    return t.transpose(1, 3, 0, 2).reshape(dim_out * dim_in, dim_out * dim_in) / dim_in


def choi_to_superoperator(j: np.ndarray, dim_in: int, dim_out: int) -> np.ndarray:
    t = np.asarray(j).reshape(dim_out, dim_in, dim_out, dim_in) * dim_in  # [o, i, o', i']
    return t.transpose(2, 0, 3, 1).reshape(dim_out**2, dim_in**2)


def kraus_from_choi(j: np.ndarray, dim_in: int, dim_out: int, cutoff: float = 1e-14) -> list[np.ndarray]:
    w, v = np.linalg.eigh(hermitize(j))
    return [
        np.sqrt(dim_in * lam) * v[:, i].reshape(dim_out, dim_in)
        for i, lam in enumerate(w)
        if lam > cutoff
    ]


def min_choi_eigenvalue(ch: KrausChannel) -> float:
    return float(np.linalg.eigvalsh(choi_matrix(ch))[0])


def is_unital(ch: KrausChannel, tol: float = 1e-10) -> bool:
    if ch.dim_in != ch.dim_out:
        return False
    out = apply_array(ch, np.eye(ch.dim_in) / ch.dim_in)
    return bool(np.max(np.abs(out - np.eye(ch.dim_out) / ch.dim_out)) <= tol)


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """The channel ``second o first``."""
    if second.dim_in != first.dim_out:
        raise DimensionError("composition dimension mismatch")
    ops = [b @ a for b in second.kraus_ops for a in first.kraus_ops]
    return KrausChannel.from_ops(ops, name=f"{second.name}.{first.name}")


# -- classification --------------------------------------------------------

def reversibility_defect(ch: KrausChannel) -> float:
    """max |M_petz M_ch - I| with the Petz map taken at the maximally mixed state."""
    from .recovery import petz_map  # recovery builds on this module

    if ch.dim_in != ch.dim_out:
        raise DimensionError("reversibility is only classified for dimension-preserving channels")
    d = ch.dim_in
    recovery = petz_map(ch, np.eye(d) / d)
    composed = superoperator_matrix(recovery) @ superoperator_matrix(ch)
    return float(np.max(np.abs(composed - np.eye(d * d))))


def is_reversible_cptp(ch: KrausChannel, tol: float = REVERSIBILITY_TOL) -> bool:
    """True when the Petz map at I/d undoes ``ch`` on every input.

    For equal input and output dimension this singles out unitary conjugations.
    """
    return reversibility_defect(ch) <= tol


def random_commuting_pair(d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two states that are spectral functions of one random Hermitian matrix."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h_vals, h_vecs = np.linalg.eigh(hermitize(g))
    if d > 1 and rng.random() < 0.25:
        h_vals[1] = h_vals[0]
    pair = []
    for _ in range(2):
        coeffs = rng.standard_normal(d)  # degree < d
        f = np.polyval(coeffs, h_vals) ** 2
        rho = (h_vecs * f) @ dag(h_vecs)
        pair.append(hermitize(rho / np.trace(rho).real))
    return pair[0], pair[1]


def preserves_commutativity_probe(
    ch: KrausChannel,
    trials: int = 200,
    seed=0,
    tol: float = PROBE_TOL,
    min_trials: int = PROBE_MIN_TRIALS,
) -> ProbeVerdict:
    """Search for a commuting pair whose images under ``ch`` do not commute.

    A ``preserves`` verdict is statistical; fewer than ``min_trials`` clean
    trials yield ``inconclusive`` instead.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        rho, sigma = random_commuting_pair(ch.dim_in, rng)
        c = float(np.max(np.abs(commutator(apply_array(ch, rho), apply_array(ch, sigma)))))
        worst = max(worst, c)
        if c > tol:
            return ProbeVerdict("violates", t + 1, tol, worst, (rho, sigma), t)
    status = "preserves" if trials >= min_trials else "inconclusive"
    return ProbeVerdict(status, trials, tol, worst)


def classify(ch: KrausChannel, trials: int = 200, seed=0, tol: float = PROBE_TOL) -> ChannelVerdict:
    err = ch.completeness_error()
    min_eig = min_choi_eigenvalue(ch)
    m = superoperator_matrix(ch)
    rank = int(np.linalg.matrix_rank(m, tol=1e-10))
    square = ch.dim_in == ch.dim_out
    return ChannelVerdict(
        cptp_valid=err <= CPTP_TOL and min_eig >= -PSD_TOL,
        unital=is_unital(ch),
        linear_rank=rank,
        reversible_cptp=square and is_reversible_cptp(ch),
        commutativity_preserving=preserves_commutativity_probe(ch, trials, seed, tol),
        completeness_error=err,
        min_choi_eigenvalue=min_eig,
    )


# -- zoo -------------------------------------------------------------------

def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def _orthonormal_basis(basis, d: int | None) -> np.ndarray:
    if basis is None:
        if d is None:
            raise ValueError("either a basis or a dimension is required")
        return np.eye(d, dtype=complex)
    b = np.asarray(basis, dtype=complex)
    if not is_unitary(b, UNITARY_TOL):
        raise ValueError("basis columns must be orthonormal")
    if d is not None and b.shape[0] != d:
        raise DimensionError(f"basis has dimension {b.shape[0]}, expected {d}")
    return b


def _full_depolarization_ops(d: int, weight: float) -> list[np.ndarray]:
    ops = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[i, j] = np.sqrt(weight / d)
            ops.append(k)
    return ops


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, d, (np.eye(d),), "identity")


def unitary_channel(u) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, UNITARY_TOL):
        raise ValueError("unitary_channel requires a unitary matrix")
    return KrausChannel(u.shape[0], u.shape[0], (u,), "unitary")


def depolarizing(p: float, d: int = 2) -> KrausChannel:
    """rho -> (1 - p) rho + p I/d."""
    p = _check_probability(p)
    ops = [] if p == 1.0 else [np.sqrt(1 - p) * np.eye(d)]
    if p > 0:
        ops += _full_depolarization_ops(d, p)
    return KrausChannel(d, d, tuple(ops), "depolarizing")


def completely_decohering(basis=None, d: int | None = None) -> KrausChannel:
    """Projective dephasing onto the columns of ``basis`` (computational by default)."""
    b = _orthonormal_basis(basis, d)
    ops = tuple(np.outer(b[:, i], b[:, i].conj()) for i in range(b.shape[1]))
    return KrausChannel(b.shape[0], b.shape[0], ops, "completely_decohering")


def isotropic(p: float, gamma: "np.ndarray | str" = "identity", d: int = 2) -> KrausChannel:
    """rho -> p Gamma(rho) + (1 - p) I/d for a spectrum-preserving Gamma.

    ``gamma`` is a unitary matrix (conjugation), ``"identity"`` or
    ``"transpose"``. The transpose variant is completely positive only for
    ``p <= 1/(d + 1)``; outside that range a :class:`CompletePositivityError`
    carries the most negative Choi eigenvalue.
    """
    p = _check_probability(p)
    if isinstance(gamma, str) and gamma == "identity":
        gamma = np.eye(d)
    if isinstance(gamma, str):
        if gamma != "transpose":
            raise ValueError(f"unknown isotropic gamma {gamma!r}")
        # Choi of the transpose map is SWAP/d
        swap = np.eye(d * d).reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)
        choi = p * swap / d + (1 - p) * np.eye(d * d) / d**2
        min_eig = float(np.linalg.eigvalsh(choi)[0])
        if min_eig < -PSD_TOL:
            raise CompletePositivityError(
                f"isotropic transpose channel with p={p} on d={d} is not completely positive "
                f"(min Choi eigenvalue {min_eig:.6g})",
                min_eig,
            )
        return KrausChannel(d, d, tuple(kraus_from_choi(choi, d, d)), "isotropic_transpose")
    u = np.asarray(gamma, dtype=complex)
    if u.shape != (d, d) or not is_unitary(u, UNITARY_TOL):
        raise ValueError("isotropic gamma must be a d x d unitary")
    ops = [np.sqrt(p) * u] if p > 0 else []
    if p < 1:
        ops += _full_depolarization_ops(d, 1 - p)
    return KrausChannel(d, d, tuple(ops), "isotropic")


def measure_and_prepare(basis, states: Sequence) -> KrausChannel:
    """Measure in ``basis``; on outcome i prepare ``states[i]``."""
    b = _orthonormal_basis(basis, None)
    if len(states) != b.shape[1]:
        raise DimensionError(f"{b.shape[1]} outcomes but {len(states)} prepared states")
    ops = []
    for i, tau in enumerate(states):
        w, v = np.linalg.eigh(DensityMatrix(as_matrix(tau)).matrix)
        for lam, e in zip(w, v.T):
            if lam > 1e-14:
                ops.append(np.sqrt(lam) * np.outer(e, b[:, i].conj()))
    return KrausChannel.from_ops(ops, name="measure_and_prepare")


def random_channel(d: int, n_kraus: int = 2, seed=None, d_out: int | None = None) -> KrausChannel:
    """Kraus operators cut from a Haar-random isometry C^d -> C^(d_out * n_kraus)."""
    d_out = d if d_out is None else d_out
    if d_out * n_kraus < d:
        raise DimensionError(f"{n_kraus} Kraus operators into dimension {d_out} cannot be trace preserving on {d}")
    u = random_unitary(d_out * n_kraus, seed)
    iso = u[:, :d]
    ops = [iso[k * d_out : (k + 1) * d_out, :] for k in range(n_kraus)]
    return KrausChannel(d, d_out, tuple(ops), "random")


# -- file format -----------------------------------------------------------

def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [encode_matrix(k) for k in ch.kraus_ops],
    }


def _matrix_arg(value) -> np.ndarray:
    if isinstance(value, np.ndarray):
        return value.astype(complex)
    return decode_matrix(value)


def channel_from_spec(spec: dict, seed=None) -> KrausChannel:
    """Build a channel from an explicit Kraus description or a zoo entry.

    Zoo entries look like ``{"zoo": "isotropic", "p": 0.5, "gamma": {"unitary": M}, "d": 2}``.
    ``random_unitary`` and ``random`` entries draw from ``seed``.
    """
    try:
        return _channel_from_spec(spec, seed)
    except KeyError as exc:
        raise FormatError(f"channel spec is missing key {exc.args[0]!r}") from None


def _channel_from_spec(spec: dict, seed) -> KrausChannel:
    if not isinstance(spec, dict):
        raise FormatError("channel spec must be a JSON object")
    if "kraus" in spec:
        ops = [decode_matrix(k) for k in spec["kraus"]]
        ch = KrausChannel.from_ops(ops)
        if "dim_in" in spec and int(spec["dim_in"]) != ch.dim_in:
            raise DimensionError(f"declared dim_in {spec['dim_in']} but operators take {ch.dim_in}")
        if "dim_out" in spec and int(spec["dim_out"]) != ch.dim_out:
            raise DimensionError(f"declared dim_out {spec['dim_out']} but operators give {ch.dim_out}")
        return ch
    if "zoo" not in spec:
        raise FormatError("channel spec needs either 'kraus' or 'zoo'")
    kind = str(spec["zoo"])
    d = int(spec.get("d", 2))
    if kind == "identity":
        return identity_channel(d)
    if kind == "unitary":
        if "gate" in spec:
            gate = str(spec["gate"]).upper()
            if gate not in GATES:
                raise FormatError(f"unknown gate {spec['gate']!r}; known: {sorted(GATES)}")
            return unitary_channel(GATES[gate])
        return unitary_channel(_matrix_arg(spec["unitary"]))
    if kind == "random_unitary":
        return unitary_channel(random_unitary(d, seed))
    if kind == "depolarizing":
        return depolarizing(float(spec["p"]), d)
    if kind in ("completely_decohering", "decohering"):
        basis = spec.get("basis")
        return completely_decohering(None if basis is None else _matrix_arg(basis), d)
    if kind == "isotropic":
        gamma = spec.get("gamma", "identity")
        if isinstance(gamma, dict):
            if "unitary" in gamma:
                gamma = _matrix_arg(gamma["unitary"])
            elif gamma.get("transpose"):
                gamma = "transpose"
            else:
                raise FormatError(f"unrecognised isotropic gamma {gamma!r}")
        return isotropic(float(spec["p"]), gamma, d)
    if kind == "measure_and_prepare":
        basis = _matrix_arg(spec["basis"]) if "basis" in spec else np.eye(d)
        states = [_matrix_arg(s) for s in spec["states"]]
        return measure_and_prepare(basis, states)
    if kind == "random":
        return random_channel(d, int(spec.get("n_kraus", 2)), seed)
    raise FormatError(f"unknown zoo channel {kind!r}")

