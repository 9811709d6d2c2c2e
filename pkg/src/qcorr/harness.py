"""Invariance experiments for mutual information, classical correlation and
discord under local channels, and the randomized suite that aggregates them.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from .channel import (
    KrausChannel,
    LocalChannelPair,
    apply_local,
    completely_decohering,
    depolarizing,
    identity_channel,
    is_reversible_cptp,
    isotropic,
    measure_and_prepare,
    preserves_commutativity_probe,
    product_channel,
    random_channel,
    unitary_channel,
)
from .discord import OptimizerConfig, classical_correlation, quantum_discord
from .entropy import mutual_information
from .errors import NumericalConsistencyError
from .qstate import (
    BipartiteState,
    Side,
    bell_state,
    random_bipartite,
    random_density,
    random_unitary,
    tensor,
)
from .recovery import check_sufficiency

ISOTROPIC_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class HarnessTolerances:
    info: float = 1e-9  # I is closed form
    correlation: float = 1e-3  # C and D are optimizer-limited
    monotonicity_slack: float = 2e-3
    recovery: float = 1e-6
    strict_decrease: float = 1e-6
    discordant: float = 1e-2  # minimum D for a state to count as discordant


@dataclass(frozen=True)
class Correlations:
    I: float
    C: float
    D: float

    def minus(self, other: "Correlations") -> "Correlations":
        return Correlations(self.I - other.I, self.C - other.C, self.D - other.D)


def verdict(delta: float, tol: float) -> str:
    if abs(delta) <= tol:
        return "invariant"
    return "decreased" if delta < 0 else "increased"


@dataclass(frozen=True)
class InvarianceReport:
    state_spec: Any
    channel_spec: Any
    side: Side
    before: Correlations
    after: Correlations
    reversibility: dict
    tolerances: HarnessTolerances
    optimizer: OptimizerConfig

    @property
    def deltas(self) -> Correlations:
        return self.after.minus(self.before)

    @property
    def verdicts(self) -> dict:
        d = self.deltas
        tol = self.tolerances
        return {
            "I": verdict(d.I, tol.info),
            "C": verdict(d.C, tol.correlation),
            "D": verdict(d.D, tol.correlation),
        }

    @property
    def flags(self) -> list[str]:
        """Loud markers for outcomes worth a second look; none of them is an error."""
        out = []
        if self.deltas.I > self.tolerances.info:
            out.append("mutual information increased under a local channel")
        if self.deltas.C > self.tolerances.monotonicity_slack:
            out.append("classical correlation increased beyond optimizer slack")
        if self.verdicts["D"] == "increased":
            out.append("discord increased")
        return out

    @property
    def seed(self) -> int:
        return self.optimizer.seed

    def to_json(self) -> dict:
        return {
            "state_spec": self.state_spec,
            "channel_spec": self.channel_spec,
            "side": self.side,
            "before": asdict(self.before),
            "after": asdict(self.after),
            "deltas": asdict(self.deltas),
            "verdict": self.verdicts,
            "reversibility": self.reversibility,
            "flags": self.flags,
            "tolerances": asdict(self.tolerances),
            "optimizer": self.optimizer.to_json(),
            "seed": self.seed,
        }


def correlations(s: BipartiteState, side: Side, cfg: OptimizerConfig) -> Correlations:
    r = quantum_discord(s, side, cfg)
    return Correlations(r.mutual_information, r.classical.value, r.value)


def run_invariance_experiment(
    s: BipartiteState,
    pair: LocalChannelPair,
    cfg: OptimizerConfig | None = None,
    side: Side = "A",
    tolerances: HarnessTolerances | None = None,
    state_spec: Any = None,
    channel_spec: Any = None,
) -> InvarianceReport:
    cfg = cfg or OptimizerConfig()
    after_state = apply_local(pair, s)
    return InvarianceReport(
        state_spec=state_spec if state_spec is not None else f"{s.dim_a}x{s.dim_b}",
        channel_spec=channel_spec if channel_spec is not None else [pair.channel_a.name, pair.channel_b.name],
        side=side,
        before=correlations(s, side, cfg),
        after=correlations(after_state, side, cfg),
        reversibility={
            "A": is_reversible_cptp(pair.channel_a),
            "B": is_reversible_cptp(pair.channel_b),
        },
        tolerances=tolerances or HarnessTolerances(),
        optimizer=cfg,
    )


def bell_isotropic_demo(p: float, cfg: OptimizerConfig | None = None) -> InvarianceReport:
    """Send the B half of (|00>+|11>)/sqrt(2) through the isotropic channel with weight ``p``."""
    pair = LocalChannelPair(identity_channel(2), isotropic(p, "identity", 2))
    bell = bell_state()
    out = apply_local(pair, bell)
    werner = p * bell.matrix + (1 - p) * np.eye(4) / 4
    err = float(np.max(np.abs(out.matrix - werner)))
    if err > 1e-12:
        raise NumericalConsistencyError(f"isotropic output deviates from the Werner form by {err:.3g}")
    return run_invariance_experiment(
        bell,
        pair,
        cfg,
        state_spec="bell",
        channel_spec={"A": {"zoo": "identity", "d": 2}, "B": {"zoo": "isotropic", "p": p, "gamma": "identity", "d": 2}},
    )


@dataclass(frozen=True)
class Lemma1Report:
    info_before: float
    info_after: float
    recovery_error_joint: float
    recovery_error_product: float
    info_tol: float
    recovery_tol: float

    @property
    def delta(self) -> float:
        return self.info_after - self.info_before

    @property
    def equal(self) -> bool:
        return abs(self.delta) <= self.info_tol

    @property
    def recovered(self) -> bool:
        return max(self.recovery_error_joint, self.recovery_error_product) <= self.recovery_tol

    def to_json(self) -> dict:
        out = asdict(self)
        out.update(delta=self.delta, equal=self.equal, recovered=self.recovered)
        return out


def lemma1_check(
    s: BipartiteState, pair: LocalChannelPair, tolerances: HarnessTolerances | None = None
) -> Lemma1Report:
    """Mutual information before/after, plus Petz recovery of rho_AB and rho_A (x) rho_B.

    The Petz map of the product channel is taken at the product of marginals,
    which is the reference state in I = S(rho_AB || rho_A (x) rho_B).
    """
    tol = tolerances or HarnessTolerances()
    product = tensor(s.marginal("A"), s.marginal("B"))
    report = check_sufficiency(product_channel(pair), s.matrix, product.matrix, recovery_tol=tol.recovery)
    return Lemma1Report(
        info_before=mutual_information(s),
        info_after=mutual_information(apply_local(pair, s)),
        recovery_error_joint=report.recovery_error_rho,
        recovery_error_product=report.recovery_error_sigma,
        info_tol=tol.info,
        recovery_tol=tol.recovery,
    )


# -- randomized suite ----------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    subsuite: str
    trial: int
    seed: int
    passed: bool
    metric: float
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SubsuiteResult:
    name: str
    metric: str
    records: tuple[TrialRecord, ...]

    @property
    def n_pass(self) -> int:
        return sum(r.passed for r in self.records)

    @property
    def n_fail(self) -> int:
        return len(self.records) - self.n_pass

    @property
    def worst_delta(self) -> float:
        return max((r.metric for r in self.records), default=0.0)

    def to_json(self) -> dict:
        return {
            "subsuite": self.name,
            "pass": self.n_pass,
            "fail": self.n_fail,
            "worst_delta": self.worst_delta,
            "metric": self.metric,
        }


@dataclass(frozen=True)
class SuiteSummary:
    seed: int
    trials: int
    optimizer: OptimizerConfig
    tolerances: HarnessTolerances
    subsuites: tuple[SubsuiteResult, ...]

    @property
    def passed(self) -> bool:
        return all(s.n_fail == 0 for s in self.subsuites)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "optimizer": self.optimizer.to_json(),
            "tolerances": asdict(self.tolerances),
            "subsuites": [s.to_json() for s in self.subsuites],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["subsuite", "trial", "seed", "passed", "metric", "detail"])
        for sub in self.subsuites:
            for r in sub.records:
                detail = ";".join(f"{k}={v}" for k, v in sorted(r.detail.items()))
                writer.writerow([r.subsuite, r.trial, r.seed, int(r.passed), repr(r.metric), detail])
        return buf.getvalue()


def _random_local_unitaries(da: int, db: int, rng: np.random.Generator) -> LocalChannelPair:
    return LocalChannelPair(
        unitary_channel(random_unitary(da, rng)), unitary_channel(random_unitary(db, rng))
    )


def random_zoo_channel(d: int, rng: np.random.Generator) -> tuple[KrausChannel, str]:
    kind = ["identity", "unitary", "depolarizing", "decohering", "isotropic", "measure_and_prepare", "random"][
        int(rng.integers(7))
    ]
    if kind == "identity":
        return identity_channel(d), kind
    if kind == "unitary":
        return unitary_channel(random_unitary(d, rng)), kind
    if kind == "depolarizing":
        return depolarizing(float(rng.uniform()), d), kind
    if kind == "decohering":
        return completely_decohering(random_unitary(d, rng)), kind
    if kind == "isotropic":
        return isotropic(float(rng.uniform()), random_unitary(d, rng), d), kind
    if kind == "measure_and_prepare":
        states = [random_density(d, seed=rng) for _ in range(d)]
        return measure_and_prepare(random_unitary(d, rng), states), kind
    return random_channel(d, 2, rng), kind


def _trial_dims(trial: int) -> tuple[int, int]:
    return (2, 2) if trial % 2 == 0 else (2, 3)


def _trial_local_unitary(trial: int, seed: int, cfg: OptimizerConfig, tol: HarnessTolerances) -> TrialRecord:
    rng = np.random.default_rng(seed)
    da, db = _trial_dims(trial)
    s = random_bipartite(da, db, rank=int(rng.integers(1, da * db + 1)), seed=rng)
    rep = run_invariance_experiment(s, _random_local_unitaries(da, db, rng), cfg, tolerances=tol)
    d = rep.deltas
    ok = abs(d.D) <= tol.correlation and abs(d.I) <= tol.info and all(rep.reversibility.values())
    return TrialRecord("local_unitary_invariance", trial, seed, ok, abs(d.D),
                       {"dims": f"{da}x{db}", "delta_I": d.I, "delta_C": d.C})


def _discordant_state(rng: np.random.Generator, da: int, db: int, cfg: OptimizerConfig, tol: HarnessTolerances):
    for _ in range(20):
        s = random_bipartite(da, db, rank=int(rng.integers(1, da * db + 1)), seed=rng)
        before = correlations(s, "A", cfg)
        if before.D > tol.discordant:
            return s, before
    raise RuntimeError("could not sample a discordant state")


def _trial_nullification(trial: int, seed: int, cfg: OptimizerConfig, tol: HarnessTolerances) -> TrialRecord:
    rng = np.random.default_rng(seed)
    da, db = _trial_dims(trial)
    s, before = _discordant_state(rng, da, db, cfg, tol)
    pair = LocalChannelPair(completely_decohering(random_unitary(da, rng)), identity_channel(db))
    after = correlations(apply_local(pair, s), "A", cfg)
    ok = after.D <= tol.correlation
    return TrialRecord("decohering_nullification", trial, seed, ok, after.D,
                       {"dims": f"{da}x{db}", "D_before": before.D})


def _trial_lemma1(trial: int, seed: int, cfg: OptimizerConfig, tol: HarnessTolerances) -> TrialRecord:
    rng = np.random.default_rng(seed)
    da, db = _trial_dims(trial)
    s = random_bipartite(da, db, seed=rng)
    reversible = lemma1_check(s, _random_local_unitaries(da, db, rng), tol)
    lossy = lemma1_check(s, LocalChannelPair(depolarizing(0.5, da), identity_channel(db)), tol)
    ok = (
        reversible.equal
        and reversible.recovered
        and lossy.delta < -tol.strict_decrease
        and not lossy.recovered
    )
    return TrialRecord("lemma1_mutual_information", trial, seed, ok, abs(reversible.delta),
                       {"dims": f"{da}x{db}", "lossy_delta_I": lossy.delta,
                        "lossy_recovery_error": lossy.recovery_error_joint})


def _trial_monotonicity(trial: int, seed: int, cfg: OptimizerConfig, tol: HarnessTolerances) -> TrialRecord:
    rng = np.random.default_rng(seed)
    da, db = _trial_dims(trial)
    s = random_bipartite(da, db, rank=int(rng.integers(1, da * db + 1)), seed=rng)
    ch_a, kind_a = random_zoo_channel(da, rng)
    ch_b, kind_b = random_zoo_channel(db, rng)
    out = apply_local(LocalChannelPair(ch_a, ch_b), s)
    c_before = classical_correlation(s, "A", cfg).value
    c_after = classical_correlation(out, "A", cfg).value
    d_info = mutual_information(out) - mutual_information(s)
    ok = c_after - c_before <= tol.monotonicity_slack and d_info <= tol.info
    return TrialRecord("classical_correlation_monotonicity", trial, seed, ok, c_after - c_before,
                       {"dims": f"{da}x{db}", "channels": f"{kind_a}|{kind_b}", "delta_I": d_info})


def _isotropic_records(seed: int, cfg: OptimizerConfig, tol: HarnessTolerances) -> list[TrialRecord]:
    reports = [bell_isotropic_demo(p, cfg) for p in ISOTROPIC_GRID]
    out = []
    for i, (p, rep) in enumerate(zip(ISOTROPIC_GRID, reports)):
        monotone = i == 0 or rep.after.D >= reports[i - 1].after.D - tol.correlation
        expected = "invariant" if p == 1.0 else "decreased"
        ok = monotone and rep.verdicts["D"] == expected
        out.append(TrialRecord("isotropic_decrease", i, seed, ok, rep.deltas.D,
                               {"p": p, "D_after": rep.after.D}))
    return out


def _probe_records(seed: int, tol: HarnessTolerances) -> list[TrialRecord]:
    rng = np.random.default_rng(seed)
    d = 2
    cases: list[tuple[str, KrausChannel, str]] = [
        ("identity", identity_channel(d), "preserves"),
        ("unitary", unitary_channel(random_unitary(d, rng)), "preserves"),
        ("depolarizing", depolarizing(0.5, d), "preserves"),
        ("completely_decohering", completely_decohering(random_unitary(d, rng)), "preserves"),
        ("isotropic", isotropic(0.5, random_unitary(d, rng), d), "preserves"),
        ("random_2_kraus", random_channel(d, 2, rng), "violates"),
        ("measure_and_prepare",
         measure_and_prepare(random_unitary(d, rng), [random_density(d, seed=rng) for _ in range(d)]),
         "violates"),
    ]
    out = []
    for i, (name, ch, expected) in enumerate(cases):
        v = preserves_commutativity_probe(ch, trials=200, seed=seed + i)
        metric = v.max_commutator if expected == "preserves" else 0.0
        out.append(TrialRecord("commutativity_probes", i, seed + i, v.status == expected, metric,
                               {"channel": name, "expected": expected, "status": v.status}))
    return out


TrialFn = Callable[[int, int, OptimizerConfig, HarnessTolerances], TrialRecord]


def _run_trials(fn: TrialFn, seed: int, trials: int, cfg, tol, workers: int) -> list[TrialRecord]:
    args = [(t, seed + t, cfg, tol) for t in range(trials)]
    if workers <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args)))


def theorem2_suite(
    seed: int = 0,
    trials: int = 50,
    cfg: OptimizerConfig | None = None,
    tolerances: HarnessTolerances | None = None,
    workers: int = 1,
) -> SuiteSummary:
    """Run the six randomized sub-suites.

    Trial ``t`` of a per-trial sub-suite draws everything from ``seed + t``,
    so results do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    cfg = cfg or OptimizerConfig(seed=seed)
    tol = tolerances or HarnessTolerances()

    def per_trial(name: str, metric: str, fn: TrialFn) -> SubsuiteResult:
        return SubsuiteResult(name, metric, tuple(_run_trials(fn, seed, trials, cfg, tol, workers)))

    results = (
        per_trial("local_unitary_invariance", "max |delta D|", _trial_local_unitary),
        per_trial("decohering_nullification", "max D after", _trial_nullification),
        SubsuiteResult("isotropic_decrease", "max delta D (negative for p < 1)",
                       tuple(_isotropic_records(seed, cfg, tol))),
        SubsuiteResult("commutativity_probes", "max commutator over expected preservers",
                       tuple(_probe_records(seed, tol))),
        per_trial("lemma1_mutual_information", "max |delta I| under local unitaries", _trial_lemma1),
        per_trial("classical_correlation_monotonicity", "max delta C", _trial_monotonicity),
    )
    return SuiteSummary(seed, trials, cfg, tol, results)
