import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import mutual_information_oracle, shannon_bits

from qcorr.channel import apply_array, random_channel
from qcorr.errors import DimensionError
from qcorr.entropy import mutual_information, relative_entropy, von_neumann_entropy
from qcorr.qstate import (
    BipartiteState,
    DensityMatrix,
    basis_projector,
    bell_state,
    maximally_mixed,
    pure_to_density,
    random_bipartite,
    random_density,
    random_pure,
    random_unitary,
    tensor,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestVonNeumann:
    def test_pure_state(self, rng):
        assert von_neumann_entropy(pure_to_density(random_pure(4, seed=rng))) == pytest.approx(0, abs=1e-12)

    def test_maximally_mixed(self):
        assert von_neumann_entropy(maximally_mixed(4)) == pytest.approx(2.0, abs=1e-14)

    def test_binary_spectrum(self):
        # -(1/4) log2(1/4) - (3/4) log2(3/4)
        assert von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(0.8112781244591328, abs=1e-6)
        assert shannon_bits([0.25, 0.75]) == pytest.approx(0.8112781244591328, abs=1e-15)

    def test_bounds(self, rng):
        for d in (2, 3, 5):
            s = von_neumann_entropy(random_density(d, seed=rng))
            assert 0 <= s <= math.log2(d)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, d=st.integers(2, 5))
    def test_unitary_invariance(self, seed, d):
        rng = np.random.default_rng(seed)
        rho = random_density(d, seed=rng).matrix
        u = random_unitary(d, rng)
        assert abs(von_neumann_entropy(u @ rho @ u.conj().T) - von_neumann_entropy(rho)) <= 1e-10


class TestRelativeEntropy:
    def test_identical_arguments(self, rng):
        rho = random_density(3, seed=rng)
        assert relative_entropy(rho, rho) == pytest.approx(0, abs=1e-12)

    def test_pure_against_maximally_mixed(self):
        # -0 - tr(|0><0| log2 I/2) = log2 2
        assert relative_entropy(basis_projector(2, 0), maximally_mixed(2)) == pytest.approx(1.0, abs=1e-14)

    def test_support_violation(self):
        assert relative_entropy(maximally_mixed(2), basis_projector(2, 0)) == math.inf

    def test_rank_deficient_but_supported(self):
        rho = np.diag([0.5, 0.5, 0.0])
        sigma = np.diag([0.25, 0.25, 0.5])
        # -S(rho) - sum rho_ii log2 sigma_ii = -1 + 2
        assert relative_entropy(rho, sigma) == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            relative_entropy(maximally_mixed(2), maximally_mixed(3))

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4))
    def test_nonnegative(self, seed, d):
        rng = np.random.default_rng(seed)
        assert relative_entropy(random_density(d, seed=rng), random_density(d, seed=rng)) >= 0

    def test_zero_only_for_equal_states(self, rng):
        rho = random_density(3, seed=rng).matrix
        sigma = 0.999 * rho + 0.001 * np.eye(3) / 3
        assert relative_entropy(rho, sigma) > 0

    def test_data_processing(self):
        # 1000 random finite-value triples, mixing dimensions, ranks and Kraus counts
        rng = np.random.default_rng(1)
        worst = -np.inf
        for _ in range(1000):
            d = int(rng.integers(2, 5))
            rho = random_density(d, int(rng.integers(1, d + 1)), rng).matrix
            sigma = random_density(d, seed=rng).matrix
            ch = random_channel(d, int(rng.integers(1, 4)), rng)
            before = relative_entropy(rho, sigma)
            after = relative_entropy(apply_array(ch, rho), apply_array(ch, sigma))
            assert math.isfinite(before)
            worst = max(worst, after - before)
        assert worst <= 1e-9


class TestMutualInformation:
    def test_product_state(self, rng):
        s = tensor(random_density(2, seed=rng), random_density(3, seed=rng))
        assert mutual_information(s) == pytest.approx(0, abs=1e-12)

    def test_bell_state(self):
        assert mutual_information(bell_state()) == pytest.approx(2.0, abs=1e-12)

    def test_forms_agree_on_random_states(self, rng):
        for _ in range(50):
            s = random_bipartite(2, 2, int(rng.integers(1, 5)), rng)
            additive = mutual_information(s)
            rel = relative_entropy(s.matrix, np.kron(s.marginal("A").matrix, s.marginal("B").matrix))
            assert abs(additive - rel) <= 1e-9
            assert additive == pytest.approx(mutual_information_oracle(s.matrix, 2, 2), abs=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, da=st.integers(1, 3), db=st.integers(1, 3))
    def test_bounds(self, seed, da, db):
        rng = np.random.default_rng(seed)
        rank = int(rng.integers(1, da * db + 1))
        s = random_bipartite(da, db, rank, rng)
        info = mutual_information(s)
        assert -1e-9 <= info <= 2 * min(math.log2(da), math.log2(db)) + 1e-9

    def test_accepts_plain_bipartite(self):
        s = BipartiteState(DensityMatrix(np.eye(6) / 6), 2, 3)
        assert mutual_information(s) == pytest.approx(0, abs=1e-12)
