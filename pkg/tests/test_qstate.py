import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import BELL, kron_oracle, partial_trace_oracle

from qcorr.errors import DimensionError, FormatError, StateValidationError
from qcorr.qstate import (
    BipartiteState,
    DensityMatrix,
    PureState,
    Tolerances,
    basis_projector,
    bell_state,
    maximally_mixed,
    partial_trace,
    pure_to_density,
    random_bipartite,
    random_density,
    random_pure,
    state_from_json,
    state_to_json,
    tensor,
    validate_state,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestTensor:
    def test_maximally_mixed_product(self):
        s = tensor(maximally_mixed(2), maximally_mixed(2))
        assert s.dims == (2, 2)
        np.testing.assert_allclose(s.matrix, np.eye(4) / 4, atol=1e-15)

    def test_basis_projectors(self):
        s = tensor(basis_projector(2, 0), basis_projector(2, 1))
        expected = np.zeros((4, 4))
        expected[1, 1] = 1.0  # |01> with A as the slow index
        np.testing.assert_array_equal(s.matrix, expected)

    def test_matches_index_summation(self, rng):
        a = random_density(2, seed=rng)
        b = random_density(3, seed=rng)
        s = tensor(a, b)
        np.testing.assert_allclose(s.matrix, kron_oracle(a.matrix, b.matrix), atol=1e-15)
        np.testing.assert_allclose(partial_trace(s, "A").matrix, a.matrix, atol=1e-12)
        np.testing.assert_allclose(partial_trace(s, "B").matrix, b.matrix, atol=1e-12)

    def test_rejects_invalid_factor(self):
        bad = DensityMatrix(np.diag([1.2, -0.2]), check=False)
        with pytest.raises(StateValidationError, match="psd"):
            tensor(bad, maximally_mixed(2))


class TestPartialTrace:
    def test_product_marginal(self, rng):
        a, b = random_density(3, seed=rng), random_density(2, seed=rng)
        np.testing.assert_allclose(partial_trace(tensor(a, b), "A").matrix, a.matrix, atol=1e-12)

    def test_bell_marginal_is_maximally_mixed(self):
        np.testing.assert_allclose(partial_trace(bell_state(), "B").matrix, np.eye(2) / 2, atol=1e-15)
        np.testing.assert_allclose(partial_trace(bell_state(), "A").matrix, np.eye(2) / 2, atol=1e-15)

    @pytest.mark.parametrize("keep", ["A", "B"])
    def test_matches_double_sum(self, rng, keep):
        s = random_bipartite(2, 3, seed=rng)
        got = partial_trace(s, keep).matrix
        np.testing.assert_allclose(got, partial_trace_oracle(s.matrix, 2, 3, keep), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            BipartiteState(random_density(4, seed=0), 2, 3)

    def test_bad_label(self):
        with pytest.raises(ValueError):
            partial_trace(bell_state(), "C")


class TestPureToDensity:
    def test_basis_vector(self):
        np.testing.assert_array_equal(pure_to_density(PureState(np.array([1, 0]))).matrix, np.diag([1, 0]))

    def test_plus_state(self):
        rho = pure_to_density(PureState(np.array([1, 1]) / np.sqrt(2))).matrix
        np.testing.assert_allclose(rho, np.full((2, 2), 0.5), atol=1e-15)

    def test_random_vector_is_projector(self, rng):
        v = random_pure(5, seed=rng)
        rho = pure_to_density(v).matrix
        np.testing.assert_allclose(rho, np.outer(v.amplitudes, v.amplitudes.conj()), atol=1e-15)
        assert abs(np.trace(rho) - 1) < 1e-12
        np.testing.assert_allclose(rho @ rho, rho, atol=1e-12)

    def test_non_unit_norm(self):
        with pytest.raises(StateValidationError, match="norm"):
            PureState(np.array([1.0, 1.0]))


class TestRandomDensity:
    def test_rank_one_is_pure(self):
        rho = random_density(2, rank=1, seed=7).matrix
        np.testing.assert_allclose(rho @ rho, rho, atol=1e-12)

    def test_full_rank(self):
        assert random_density(3, rank=3, seed=7).eigenvalues().min() > 0

    def test_deterministic(self):
        a = random_density(4, 2, seed=11).matrix
        b = random_density(4, 2, seed=11).matrix
        assert np.array_equal(a, b)

    def test_rank_too_large(self):
        with pytest.raises(ValueError):
            random_density(2, rank=3, seed=0)

    def test_immutable(self):
        rho = random_density(2, seed=0)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1.0


class TestValidateState:
    def test_valid(self):
        assert validate_state(np.eye(2) / 2) == []

    def test_psd_violation(self):
        (v,) = validate_state(np.diag([1.2, -0.2]))
        assert v.invariant == "psd"
        assert v.magnitude == pytest.approx(0.2, abs=1e-12)

    def test_hermiticity_violation(self):
        violations = validate_state(np.array([[0.5, 0.1j], [0.1j, 0.5]]))
        assert [v.invariant for v in violations] == ["hermiticity"]
        assert violations[0].magnitude == pytest.approx(0.2)

    def test_trace_violation(self):
        (v,) = validate_state(np.eye(2))
        assert v.invariant == "trace" and v.magnitude == pytest.approx(1.0)

    def test_custom_tolerance(self):
        m = np.diag([1.0 + 1e-6, -1e-6])
        assert validate_state(m) != []
        assert validate_state(m, Tolerances(trace=1e-5, psd=1e-5)) == []

    def test_non_square(self):
        with pytest.raises(DimensionError):
            validate_state(np.ones((2, 3)))


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, da=st.integers(1, 3), db=st.integers(1, 3))
    def test_tensor_then_trace_recovers_factors(self, seed, da, db):
        rng = np.random.default_rng(seed)
        a, b = random_density(da, seed=rng), random_density(db, seed=rng)
        s = tensor(a, b)
        assert np.max(np.abs(partial_trace(s, "A").matrix - a.matrix)) <= 1e-12
        assert np.max(np.abs(partial_trace(s, "B").matrix - b.matrix)) <= 1e-12
        assert abs(np.trace(s.matrix) - np.trace(a.matrix) * np.trace(b.matrix)) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, da=st.integers(1, 3), db=st.integers(1, 3), keep=st.sampled_from("AB"))
    def test_partial_trace_preserves_trace(self, seed, da, db, keep):
        m = random_density(da * db, seed=seed).matrix
        s = BipartiteState(DensityMatrix(m), da, db)
        assert abs(np.trace(partial_trace(s, keep).matrix) - np.trace(m)) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, dim=st.integers(1, 6), data=st.data())
    def test_random_density_is_valid(self, seed, dim, data):
        rank = data.draw(st.integers(1, dim))
        assert validate_state(random_density(dim, rank, seed).matrix) == []


class TestFileFormat:
    def test_round_trip(self, rng):
        s = random_bipartite(2, 3, seed=rng)
        back = state_from_json(json.loads(json.dumps(state_to_json(s))))
        assert back.dims == (2, 3)
        np.testing.assert_array_equal(back.matrix, s.matrix)

    def test_pure_round_trip(self):
        v = random_pure(3, seed=1)
        back = state_from_json(state_to_json(v))
        assert isinstance(back, PureState)
        np.testing.assert_array_equal(back.amplitudes, v.amplitudes)

    def test_pure_with_bipartition(self):
        amps = [[2**-0.5, 0], [0, 0], [0, 0], [2**-0.5, 0]]
        s = state_from_json({"dim": 4, "dim_a": 2, "dim_b": 2, "amplitudes": amps})
        np.testing.assert_allclose(s.matrix, BELL, atol=1e-15)

    def test_entries_are_pairs(self):
        doc = state_to_json(bell_state())
        assert doc["matrix"][0][3] == pytest.approx([0.5, 0.0], abs=1e-15)

    def test_missing_keys(self):
        with pytest.raises(FormatError, match="matrix"):
            state_from_json({"dim_a": 2, "dim_b": 2})

    def test_invalid_state_rejected(self):
        doc = {"dim_a": 1, "dim_b": 2, "matrix": [[[1.2, 0], [0, 0]], [[0, 0], [-0.2, 0]]]}
        with pytest.raises(StateValidationError) as err:
            state_from_json(doc)
        assert err.value.violations[0].invariant == "psd"
