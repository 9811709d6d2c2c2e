import csv
import io
import json

import numpy as np
import pytest
from oracles import werner_discord

from qcorr.channel import (
    LocalChannelPair,
    completely_decohering,
    depolarizing,
    identity_channel,
    unitary_channel,
)
from qcorr.discord import OptimizerConfig
from qcorr.harness import (
    Correlations,
    HarnessTolerances,
    bell_isotropic_demo,
    lemma1_check,
    random_zoo_channel,
    run_invariance_experiment,
    theorem2_suite,
    verdict,
)
from qcorr.qstate import bell_state, random_bipartite, random_unitary


class TestVerdict:
    @pytest.mark.parametrize(
        "delta,expected", [(0.0, "invariant"), (5e-4, "invariant"), (-0.1, "decreased"), (0.1, "increased")]
    )
    def test_labels(self, delta, expected):
        assert verdict(delta, 1e-3) == expected

    def test_minus(self):
        assert Correlations(2, 1, 1).minus(Correlations(1, 0.5, 0.5)) == Correlations(1, 0.5, 0.5)


class TestInvarianceExperiment:
    def test_local_unitaries(self, rng, fast_cfg):
        s = random_bipartite(2, 2, seed=rng)
        pair = LocalChannelPair(unitary_channel(random_unitary(2, rng)), unitary_channel(random_unitary(2, rng)))
        rep = run_invariance_experiment(s, pair, fast_cfg)
        assert rep.verdicts == {"I": "invariant", "C": "invariant", "D": "invariant"}
        assert rep.reversibility == {"A": True, "B": True}
        assert rep.flags == []

    def test_decohering_measured_side(self, fast_cfg):
        pair = LocalChannelPair(completely_decohering(d=2), identity_channel(2))
        rep = run_invariance_experiment(bell_state(), pair, fast_cfg)
        assert rep.after.D == pytest.approx(0.0, abs=1e-3)
        assert rep.verdicts["D"] == "decreased"
        assert rep.reversibility == {"A": False, "B": True}

    def test_report_json(self, fast_cfg):
        rep = run_invariance_experiment(bell_state(), LocalChannelPair(identity_channel(2), depolarizing(0.3)), fast_cfg)
        doc = json.loads(json.dumps(rep.to_json()))
        assert set(doc) >= {"before", "after", "deltas", "verdict", "reversibility", "flags", "seed", "tolerances"}
        assert doc["optimizer"]["restarts"] == 8


class TestBellIsotropicDemo:
    @pytest.mark.parametrize("p", [0.0, 0.5, 1.0])
    def test_matches_closed_form(self, p, fast_cfg):
        rep = bell_isotropic_demo(p, fast_cfg)
        assert rep.after.D == pytest.approx(werner_discord(p), abs=2e-3)
        assert rep.before.D == pytest.approx(1.0, abs=1e-3)

    def test_verdicts(self, fast_cfg):
        assert bell_isotropic_demo(0.5, fast_cfg).verdicts["D"] == "decreased"
        assert bell_isotropic_demo(1.0, fast_cfg).verdicts["D"] == "invariant"


class TestLemma1:
    def test_unitaries_saturate(self, rng):
        s = random_bipartite(2, 3, seed=rng)
        pair = LocalChannelPair(unitary_channel(random_unitary(2, rng)), unitary_channel(random_unitary(3, rng)))
        rep = lemma1_check(s, pair)
        assert rep.equal and rep.recovered
        assert abs(rep.delta) <= 1e-9

    def test_depolarizing_strictly_decreases(self, rng):
        s = random_bipartite(2, 2, seed=rng)
        rep = lemma1_check(s, LocalChannelPair(depolarizing(0.5), identity_channel(2)))
        assert rep.delta < -1e-6
        assert not rep.equal and not rep.recovered
        assert rep.recovery_error_product <= 1e-6  # the reference state is always recovered

    def test_json(self, rng):
        doc = lemma1_check(random_bipartite(2, 2, seed=rng), LocalChannelPair(identity_channel(2), identity_channel(2))).to_json()
        assert doc["equal"] and doc["recovered"]


class TestZooSampler:
    def test_channels_are_cptp(self, rng):
        kinds = set()
        for _ in range(60):
            ch, kind = random_zoo_channel(3, rng)
            kinds.add(kind)
            assert ch.completeness_error() < 1e-10
            assert (ch.dim_in, ch.dim_out) == (3, 3)
        assert len(kinds) == 7


@pytest.fixture(scope="module")
def summary():
    return theorem2_suite(seed=3, trials=2, cfg=OptimizerConfig(restarts=8, seed=3))


class TestSuite:
    def test_passes(self, summary):
        assert summary.passed
        assert [s.name for s in summary.subsuites] == [
            "local_unitary_invariance",
            "decohering_nullification",
            "isotropic_decrease",
            "commutativity_probes",
            "lemma1_mutual_information",
            "classical_correlation_monotonicity",
        ]

    def test_counts(self, summary):
        by_name = {s.name: s for s in summary.subsuites}
        assert by_name["local_unitary_invariance"].n_pass == 2
        assert by_name["isotropic_decrease"].n_pass == 5
        assert by_name["commutativity_probes"].n_pass == 7

    def test_json_fields(self, summary):
        for row in summary.to_json()["subsuites"]:
            assert set(row) == {"subsuite", "pass", "fail", "worst_delta", "metric"}

    def test_csv(self, summary):
        rows = list(csv.DictReader(io.StringIO(summary.to_csv())))
        assert len(rows) == 2 + 2 + 5 + 7 + 2 + 2
        assert {r["passed"] for r in rows} == {"1"}

    def test_workers_do_not_change_results(self, summary):
        parallel = theorem2_suite(seed=3, trials=2, cfg=OptimizerConfig(restarts=8, seed=3), workers=2)
        assert json.dumps(parallel.to_json()) == json.dumps(summary.to_json())

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            theorem2_suite(trials=0)


def test_tolerance_defaults():
    tol = HarnessTolerances()
    assert (tol.info, tol.correlation, tol.monotonicity_slack) == (1e-9, 1e-3, 2e-3)
    assert np.isclose(tol.recovery, 1e-6)
