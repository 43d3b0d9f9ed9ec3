import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import skewdrift as sd
from skewdrift.errors import (
    IncompatibleProductsError,
    ResourceBoundError,
    WindowTooShortError,
)

from conftest import constant_product


def geometric_spec(full2, uniform_chain, scale=0.01):
    rho = np.array([[scale, -scale], [0.6 * scale, -0.6 * scale]])
    return sd.ContinuousProductSpec(
        full2, uniform_chain, "affine", "a",
        ({"a": 0.10, "b": 0.8}, {"a": 0.12, "b": 0.8}), rho,
    )


class TestConstruction:
    def test_missing_word_rejected(self, full2, uniform_chain):
        with pytest.raises(ValueError, match="missing"):
            sd.MultistepSkewProduct(full2, uniform_chain, (0, 0), {(1,): sd.Affine(0.1, 0.8)})

    def test_out_of_class_map_rejected(self, full2, uniform_chain):
        f = sd.Affine(0.2, 0.8)  # f(1) = 1.0 touches the boundary
        with pytest.raises(ValueError, match="f\\(1\\)"):
            constant_product(full2, uniform_chain, f)

    def test_window_cap(self, full2, uniform_chain):
        with pytest.raises(ResourceBoundError):
            sd.MultistepSkewProduct(full2, uniform_chain, (6, 6), {})

    def test_json_round_trip(self, two_map, full2, uniform_chain):
        back = sd.MultistepSkewProduct.from_json(full2, uniform_chain, two_map.to_json())
        assert back.window == two_map.window
        assert back.assignment == two_map.assignment
        assert back.fingerprint() == two_map.fingerprint()


class TestIterate:
    def test_fixed_point_constant_system(self, const_affine):
        p = sd.LabeledPoint(sd.SymbolWindow(-3, (1, 2, 1, 1, 2, 1, 1, 2, 1, 2)), 0.5)
        out = sd.iterate(const_affine, p, 7)
        assert out.x == pytest.approx(0.5)
        assert out.window.offset == -10

    def test_two_map_two_steps(self, two_map):
        p = sd.LabeledPoint(sd.SymbolWindow(-1, (1, 1, 2, 1)), 0.0)
        out = sd.iterate(two_map, p, 2)
        assert out.x == pytest.approx(0.27)

    def test_window_too_short(self, two_map):
        p = sd.LabeledPoint(sd.SymbolWindow(0, (1, 2)), 0.0)
        with pytest.raises(WindowTooShortError):
            sd.iterate(two_map, p, 3)

    @given(a=st.integers(1, 3), b=st.integers(1, 3), seed=st.integers(0, 500))
    @settings(max_examples=100, deadline=None)
    def test_semigroup_property(self, two_map, a, b, seed):
        rng = np.random.default_rng(seed)
        win = sd.sample_window(two_map.chain, -1, a + b + 1, rng)
        p = sd.LabeledPoint(win, float(rng.random()))
        combined = sd.iterate(two_map, p, a + b)
        stepped = sd.iterate(two_map, sd.iterate(two_map, p, a), b)
        assert combined.x == pytest.approx(stepped.x, abs=1e-14)
        assert combined.window == stepped.window


class TestCompareOrder:
    def test_offset_pair(self, full2, uniform_chain):
        F = constant_product(full2, uniform_chain, sd.Affine(0.1, 0.8))
        G = constant_product(full2, uniform_chain, sd.Affine(0.15, 0.8))
        assert sd.compare_order(F, G) is sd.ProductOrder.FIRST_BELOW
        assert sd.compare_order(G, F) is sd.ProductOrder.SECOND_BELOW

    def test_self_comparison_incomparable(self, const_affine):
        assert sd.compare_order(const_affine, const_affine) is sd.ProductOrder.INCOMPARABLE

    def test_crossing_pair_incomparable(self, full2, uniform_chain):
        # word 1: strictly below everywhere; word 2: the difference crosses zero
        F = sd.MultistepSkewProduct(
            full2, uniform_chain, (0, 0),
            {(1,): sd.Affine(0.1, 0.5), (2,): sd.Affine(0.3, 0.5)},
        )
        G = sd.MultistepSkewProduct(
            full2, uniform_chain, (0, 0),
            {(1,): sd.Affine(0.15, 0.5), (2,): sd.Affine(0.25, 0.62)},
        )
        d = np.linspace(0, 1, 101)
        crosses = ((0.3 + 0.5 * d) - (0.25 + 0.62 * d))
        assert (crosses > 0).any() and (crosses < 0).any()
        assert sd.compare_order(F, G) is sd.ProductOrder.INCOMPARABLE

    def test_window_mismatch(self, const_affine, ms_full):
        with pytest.raises(IncompatibleProductsError):
            sd.compare_order(const_affine, ms_full)

    def test_base_mismatch(self, ms_full, golden_ms):
        with pytest.raises(IncompatibleProductsError):
            sd.compare_order(ms_full, golden_ms)
        with pytest.raises(IncompatibleProductsError):
            sd.distance(ms_full, golden_ms)

    def test_padding_enables_comparison(self, full2, uniform_chain, ms_full):
        low = constant_product(full2, uniform_chain, sd.Affine(0.02, 0.75))
        padded = sd.pad_to_window(low, ms_full.window)
        assert sd.compare_order(padded, ms_full) is sd.ProductOrder.FIRST_BELOW

    def test_transitivity_on_family(self, const_affine):
        fam = sd.MonotoneFamily(const_affine, 1.0, (-0.05, 0.2))
        members = [sd.family_member(fam, t) for t in (0.0, 0.05, 0.1)]
        assert sd.compare_order(members[0], members[1]) is sd.ProductOrder.FIRST_BELOW
        assert sd.compare_order(members[1], members[2]) is sd.ProductOrder.FIRST_BELOW
        assert sd.compare_order(members[0], members[2]) is sd.ProductOrder.FIRST_BELOW

    def test_order_implies_positive_distance(self, full2, uniform_chain):
        F = constant_product(full2, uniform_chain, sd.Affine(0.1, 0.8))
        G = constant_product(full2, uniform_chain, sd.Affine(0.15, 0.8))
        assert sd.compare_order(F, G) is sd.ProductOrder.FIRST_BELOW
        assert sd.distance(F, G) > 0


class TestDistance:
    def test_self_distance_zero(self, const_affine):
        assert sd.distance(const_affine, const_affine) == 0.0

    def test_offset_pair_closed_form(self, full2, uniform_chain):
        # oracle: all four sup terms in closed form for a + b*x vs a' + b*x:
        # |f-g| = da, |f'-g'| = 0, |f^-1-g^-1| = da/b on the common range
        F = constant_product(full2, uniform_chain, sd.Affine(0.1, 0.75))
        G = constant_product(full2, uniform_chain, sd.Affine(0.2, 0.75))
        expected = 0.1 / 0.75
        d = sd.distance(F, G)
        assert expected - 1e-9 <= d <= expected + 1e-4

    def test_symmetry(self, two_map, full2, uniform_chain):
        other = constant_product(full2, uniform_chain, sd.Affine(0.12, 0.8))
        assert sd.distance(two_map, other) == sd.distance(other, two_map)


class TestMultistepApproximation:
    def test_no_dependence_equals_one_step(self, full2, uniform_chain):
        spec = geometric_spec(full2, uniform_chain, scale=0.0)
        for m in (0, 2):
            approx = sd.multistep_approximation(spec, m)
            for word, fmap in approx.assignment.items():
                expected = sd.Affine(0.10, 0.8) if word[m] == 1 else sd.Affine(0.12, 0.8)
                assert fmap == expected

    def test_halving_ratio(self, full2, uniform_chain):
        spec = geometric_spec(full2, uniform_chain)
        approx = {m: sd.multistep_approximation(spec, m) for m in range(2, 6)}
        dists = [sd.distance(approx[m], approx[m + 1]) for m in (2, 3, 4)]
        for a, b in zip(dists, dists[1:]):
            assert 0.3 <= b / a <= 0.7
        for m, d in zip((2, 3, 4), dists):
            assert d <= sd.approximation_distance_bound(spec, m)

    def test_cauchy_decrease_on_random_specs(self, full2, uniform_chain):
        rng = np.random.default_rng(17)
        for _ in range(5):
            rho = rng.uniform(-0.01, 0.01, (2, 2))
            spec = sd.ContinuousProductSpec(
                full2, uniform_chain, "affine", "a",
                ({"a": 0.10, "b": 0.8}, {"a": 0.12, "b": 0.8}), rho,
            )
            approx = {m: sd.multistep_approximation(spec, m) for m in range(2, 6)}
            dists = [sd.distance(approx[m], approx[m + 1]) for m in (2, 3, 4)]
            assert dists[0] >= dists[1] >= dists[2]

    def test_window_cap(self, full2, uniform_chain):
        with pytest.raises(ResourceBoundError):
            sd.multistep_approximation(geometric_spec(full2, uniform_chain), 6)

    def test_worst_case_class_validation(self, full2, uniform_chain):
        rho = np.full((2, 2), 0.06)  # series mass 2 * 0.06 pushes f(1) past 1
        with pytest.raises(ValueError, match="class"):
            sd.ContinuousProductSpec(
                full2, uniform_chain, "affine", "a",
                ({"a": 0.10, "b": 0.8}, {"a": 0.12, "b": 0.8}), rho,
            )
