import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import skewdrift as sd
from skewdrift.errors import (
    IncomparableWindowsError,
    InvalidMatrixError,
    NotErgodicError,
)

from conftest import FULL2, GOLDEN


def dfs_strongly_connected(matrix):
    """Independent oracle: plain reachability from every node."""
    n = len(matrix)

    def reach(start):
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if matrix[i][j] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    return all(len(reach(i)) == n for i in range(n))


class TestValidateTransitive:
    def test_disconnected_loops(self):
        assert sd.validate_transitive([[1, 0], [0, 1]]) is False

    def test_full_shift(self):
        assert sd.validate_transitive([[1, 1], [1, 1]]) is True

    def test_golden_mean_matches_dfs_oracle(self):
        assert sd.validate_transitive(GOLDEN) is dfs_strongly_connected(GOLDEN)
        assert sd.validate_transitive(GOLDEN) is True

    @given(st.integers(2, 5), st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_matches_dfs_oracle_on_random_matrices(self, n, rnd):
        matrix = [[1 if rnd.random() < 0.4 else 0 for _ in range(n)] for _ in range(n)]
        assert sd.validate_transitive(matrix) is dfs_strongly_connected(matrix)

    def test_rejects_bad_input(self):
        with pytest.raises(InvalidMatrixError):
            sd.validate_transitive([[1, 1, 0], [1, 1, 1]])
        with pytest.raises(InvalidMatrixError):
            sd.validate_transitive([[1, 2], [1, 1]])

    def test_system_construction_fails_on_nontransitive(self):
        with pytest.raises(InvalidMatrixError):
            sd.TransitionSystem(np.array([[1, 0], [0, 1]]))
        with pytest.raises(InvalidMatrixError):
            sd.TransitionSystem(np.array([[1, 1], [0, 0]]))


class TestMetric:
    def test_identical_windows_value_zero_flagged(self):
        w = sd.SymbolWindow(-3, (1, 2, 1, 1, 2, 1, 2))
        result = sd.metric(w, w)
        assert result.value == 0.0
        assert not result.exact
        # agreement on [-3, 3] still allows disagreement at |n| = 4
        assert result.upper_bound == 2.0 ** -4

    def test_first_disagreement_at_two(self):
        a = sd.SymbolWindow(-3, (1, 1, 1, 1, 1, 1, 2))  # differs at n = -2 and n = 3
        b = sd.SymbolWindow(-3, (1, 2, 1, 1, 1, 1, 1))
        result = sd.metric(a, b)
        assert result.exact and result.value == 0.25

    def test_disagreement_at_zero(self):
        a = sd.SymbolWindow(-1, (1, 1, 1))
        b = sd.SymbolWindow(-1, (1, 2, 1))
        assert sd.metric(a, b).value == 1.0

    def test_disjoint_ranges_error(self):
        a = sd.SymbolWindow(-5, (1, 1))
        b = sd.SymbolWindow(0, (1, 1))
        with pytest.raises(IncomparableWindowsError):
            sd.metric(a, b)

    @given(st.lists(st.integers(1, 2), min_size=7, max_size=7),
           st.lists(st.integers(1, 2), min_size=7, max_size=7))
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, xs, ys):
        a = sd.SymbolWindow(-3, tuple(xs))
        b = sd.SymbolWindow(-3, tuple(ys))
        ab, ba = sd.metric(a, b), sd.metric(b, a)
        assert ab.value == ba.value and ab.exact == ba.exact

    @given(st.lists(st.integers(1, 2), min_size=5, max_size=5),
           st.lists(st.integers(1, 2), min_size=5, max_size=5),
           st.lists(st.integers(1, 2), min_size=5, max_size=5))
    @settings(max_examples=200, deadline=None)
    def test_ultrametric_on_common_range(self, xs, ys, zs):
        a = sd.SymbolWindow(-2, tuple(xs))
        b = sd.SymbolWindow(-2, tuple(ys))
        c = sd.SymbolWindow(-2, tuple(zs))
        assert sd.metric(a, c).value <= max(sd.metric(a, b).value, sd.metric(b, c).value)


class TestStationary:
    def test_symmetric_chain(self):
        pi = sd.stationary_distribution([[0.5, 0.5], [0.5, 0.5]])
        np.testing.assert_allclose(pi, [0.5, 0.5], atol=1e-14)

    def test_two_state_matches_closed_form(self):
        # oracle: pi = (p21, p12) / (p12 + p21) for a two-state chain
        pi = sd.stationary_distribution([[0.9, 0.1], [0.5, 0.5]])
        np.testing.assert_allclose(pi, [5 / 6, 1 / 6], atol=1e-12)

    def test_permutation_chain(self):
        pi = sd.stationary_distribution([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(pi, [0.5, 0.5], atol=1e-14)

    def test_reducible_support_rejected(self):
        with pytest.raises(NotErgodicError):
            sd.stationary_distribution([[1.0, 0.0], [0.0, 1.0]])

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=50, deadline=None)
    def test_residual_below_tolerance(self, rnd):
        n = rnd.choice([2, 3, 4])
        P = np.array([[rnd.random() + 0.05 for _ in range(n)] for _ in range(n)])
        P /= P.sum(axis=1, keepdims=True)
        pi = sd.stationary_distribution(P)
        assert np.abs(pi @ P - pi).max() < 1e-10
        assert abs(pi.sum() - 1.0) < 1e-12


class TestCylinderMeasure:
    def test_uniform_full_shift(self, uniform_chain):
        for w in [(1, 1, 1), (1, 2, 1), (2, 2, 2)]:
            assert sd.cylinder_measure(uniform_chain, sd.SymbolWindow(0, w)) == pytest.approx(1 / 8)

    def test_golden_word(self, golden_chain):
        np.testing.assert_allclose(golden_chain.stationary, [0.75, 0.25], atol=1e-12)
        m = sd.cylinder_measure(golden_chain, sd.SymbolWindow(0, (1, 2)))
        assert m == pytest.approx(0.25, abs=1e-12)

    def test_forbidden_word_measures_zero(self, golden_chain):
        assert sd.cylinder_measure(golden_chain, sd.SymbolWindow(0, (2, 2))) == 0.0

    def test_shift_invariance(self, golden_chain):
        a = sd.cylinder_measure(golden_chain, sd.SymbolWindow(0, (1, 2, 1)))
        b = sd.cylinder_measure(golden_chain, sd.SymbolWindow(-2, (1, 2, 1)))
        assert a == b

    @given(length=st.integers(1, 5), pick=st.integers(0, 200))
    @settings(max_examples=120, deadline=None)
    def test_additivity_under_extension(self, golden_chain, length, pick):
        words = golden_chain.base.words(length)
        w = words[pick % len(words)]
        total = sum(
            sd.cylinder_measure(golden_chain, sd.SymbolWindow(0, w + (a,)))
            for a in golden_chain.base.successors(w[-1])
        )
        assert total == pytest.approx(sd.cylinder_measure(golden_chain, sd.SymbolWindow(0, w)), abs=1e-12)


class TestPeriodicWords:
    def test_full_shift_period_two(self, full2):
        assert len(sd.periodic_words(full2, 2)) == 4

    def test_golden_period_one(self, golden):
        words = sd.periodic_words(golden, 1)
        assert [w.symbols for w in words] == [(1,)]

    def test_golden_period_three(self, golden):
        assert len(sd.periodic_words(golden, 3)) == 4

    @pytest.mark.parametrize("matrix", [FULL2, GOLDEN])
    def test_count_equals_trace_power(self, matrix):
        system = sd.TransitionSystem(np.array(matrix))
        A = np.array(matrix)
        for n in range(1, 9):
            assert len(sd.periodic_words(system, n)) == int(np.trace(np.linalg.matrix_power(A, n)))

    def test_minimal_period(self):
        assert sd.PeriodicWord((1, 2, 1, 2)).minimal_period == 2
        assert sd.PeriodicWord((1, 1, 2)).minimal_period == 3

    def test_bad_argument(self, full2):
        with pytest.raises(ValueError):
            sd.periodic_words(full2, 0)


class TestSampling:
    def test_reproducible(self, uniform_chain):
        a = sd.sample_window(uniform_chain, -2, 2, np.random.default_rng(11))
        b = sd.sample_window(uniform_chain, -2, 2, np.random.default_rng(11))
        assert a == b and len(a.symbols) == 5

    def test_symbol_frequency_full_shift(self, uniform_chain):
        rng = np.random.default_rng(3)
        draws = [sd.sample_window(uniform_chain, 0, 0, rng).symbols[0] for _ in range(100_000)]
        freq = draws.count(1) / len(draws)
        assert abs(freq - 0.5) < 0.01

    def test_golden_never_emits_forbidden_adjacency(self, golden_chain):
        rng = np.random.default_rng(5)
        hits = 0
        for _ in range(20_000):
            w = sd.sample_window(golden_chain, -2, 2, rng).symbols
            hits += any(a == 2 and b == 2 for a, b in zip(w, w[1:]))
        assert hits == 0

    def test_single_symbol_from_stationary(self, golden_chain):
        rng = np.random.default_rng(9)
        draws = [sd.sample_window(golden_chain, 0, 0, rng).symbols[0] for _ in range(50_000)]
        assert abs(draws.count(1) / len(draws) - 0.75) < 0.01

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=100, deadline=None)
    def test_samples_always_admissible(self, golden_chain, seed):
        w = sd.sample_window(golden_chain, -3, 3, np.random.default_rng(seed))
        assert golden_chain.base.admits(w.symbols)

    def test_precondition(self, uniform_chain):
        with pytest.raises(ValueError):
            sd.sample_window(uniform_chain, 1, 3, np.random.default_rng(0))
