import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import skewdrift as sd
from skewdrift.fibers import EPS_ROUND


def sample_maps():
    return [
        sd.Affine(0.1, 0.8),
        sd.Affine(0.3, 0.5),
        sd.BumpedAffine(0.1, 0.7, 0.2),
        sd.BumpedAffine(0.2, 0.6, -0.3),
        sd.Plateau(0.5, 0.4, 0.6),
        sd.Plateau(0.8, 0.3, 0.7),
        sd.BumpComposed(0.4, sd.Plateau(0.5, 0.4, 0.6)),
        sd.BumpComposed(-0.25, sd.Affine(0.1, 0.8)),
    ]


class TestValidateClass:
    def test_affine_inside(self):
        assert sd.validate_class(sd.Affine(0.1, 0.8)).ok

    def test_affine_escapes(self):
        check = sd.validate_class(sd.Affine(0.1, 0.95))
        assert not check and "f(1)" in check.reason

    def test_bumped_derivative_bound(self):
        # oracle: minimize b + c*(1 - 2x) over a fine grid of [0, 1]
        b, c = 0.5, 0.6
        grid_min = min(b + c * (1 - 2 * x) for x in np.linspace(0, 1, 10_001))
        assert grid_min == pytest.approx(b - abs(c), abs=1e-4)
        assert not sd.validate_class(sd.BumpedAffine(0.1, b, c))

    def test_plateau_requirements(self):
        assert sd.validate_class(sd.Plateau(0.5, 0.4, 0.6)).ok
        assert not sd.validate_class(sd.Plateau(-0.5, 0.4, 0.6))
        assert not sd.validate_class(sd.Plateau(0.5, 0.0, 0.6))
        assert not sd.validate_class(sd.Plateau(2.0, 0.4, 0.6))  # slope bound fails

    def test_all_samples_in_class(self):
        for f in sample_maps():
            assert sd.validate_class(f).ok, f


class TestEvalAndDerivative:
    def test_affine_values(self):
        f = sd.Affine(0.1, 0.8)
        assert sd.evaluate(f, 0.5) == pytest.approx(0.5)
        assert sd.derivative(f, 0.5) == 0.8

    def test_plateau_identity_region(self):
        f = sd.Plateau(0.5, 0.4, 0.6)
        assert sd.evaluate(f, 0.5) == 0.5
        assert sd.derivative(f, 0.5) == 1.0

    def test_plateau_at_zero(self):
        f = sd.Plateau(0.5, 0.4, 0.6)
        assert sd.evaluate(f, 0.0) == pytest.approx(0.08)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            sd.evaluate(sd.Affine(0.1, 0.8), 1.5)

    def test_vectorized_matches_scalar(self):
        xs = np.linspace(0, 1, 257)
        for f in sample_maps():
            np.testing.assert_allclose(f.eval(xs), [f.eval(float(x)) for x in xs], rtol=0, atol=0)

    def test_finite_differences(self):
        # central differences on a quadratic-by-pieces map are exact up to
        # rounding; the composed forms contribute a genuine third derivative
        h = 1e-5
        rng = np.random.default_rng(0)
        for f in sample_maps():
            m3 = f.third_derivative_bound()
            joins = [f.j_lo, f.j_hi] if isinstance(f, sd.Plateau) else []
            if isinstance(f, sd.BumpComposed) and isinstance(f.inner, sd.Plateau):
                joins = [f.inner.j_lo, f.inner.j_hi]
            count = 0
            while count < 100:
                x = float(rng.uniform(2 * h, 1 - 2 * h))
                if any(abs(x - j) < 2 * h for j in joins):
                    continue
                count += 1
                fd = (f.eval(x + h) - f.eval(x - h)) / (2 * h)
                assert abs(f.derivative(x) - fd) <= 10 * h * h * m3 + 1e-9

    def test_derivative_range_encloses(self):
        rng = np.random.default_rng(1)
        for f in sample_maps():
            for _ in range(50):
                lo, hi = sorted(rng.uniform(0, 1, 2))
                dlo, dhi = f.derivative_range(lo, hi)
                for x in rng.uniform(lo, hi, 20):
                    assert dlo - 1e-12 <= f.derivative(float(x)) <= dhi + 1e-12


class TestInvert:
    def test_affine_fixed_point(self):
        assert sd.invert(sd.Affine(0.1, 0.8), 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_affine_closed_form(self):
        # oracle: x = (y - a) / b
        assert sd.invert(sd.Affine(0.1, 0.8), 0.9) == pytest.approx(1.0, abs=1e-10)

    def test_plateau_identity(self):
        assert sd.invert(sd.Plateau(0.5, 0.4, 0.6), 0.45) == pytest.approx(0.45, abs=1e-12)

    def test_range_error(self):
        with pytest.raises(ValueError):
            sd.invert(sd.Affine(0.1, 0.8), 0.95)

    def test_round_trip_all_forms(self):
        rng = np.random.default_rng(2)
        for f in sample_maps():
            xs = rng.uniform(0, 1, 1000)
            back = sd.invert(f, np.asarray(f.eval(xs)))
            assert np.abs(back - xs).max() < 1e-10

    def test_residual_below_tolerance(self):
        rng = np.random.default_rng(4)
        for f in sample_maps():
            ys = rng.uniform(float(f.eval(0.0)), float(f.eval(1.0)), 500)
            xs = sd.invert(f, ys)
            assert np.abs(np.asarray(f.eval(xs)) - ys).max() < 1e-12

    @given(x=st.floats(0, 1), y=st.floats(0, 1))
    @settings(max_examples=300, deadline=None)
    def test_monotone(self, x, y):
        lo, hi = sorted((x, y))
        if hi - lo < 1e-12:  # below float granularity of the arithmetic
            return
        for f in sample_maps():
            assert f.eval(lo) < f.eval(hi)


class TestComposeAndIntervals:
    def test_two_step_composition(self):
        maps = [sd.Affine(0.1, 0.8), sd.Affine(0.2, 0.7)]
        assert sd.compose_along_word(maps, 0.0) == pytest.approx(0.27)

    def test_empty_word_is_identity(self):
        assert sd.compose_along_word([], 0.3) == 0.3

    def test_fixed_point_composition(self):
        f = sd.Affine(0.1, 0.8)
        assert sd.compose_along_word([f, f], 0.5) == pytest.approx(0.5)

    def test_interval_image_endpoints(self):
        img = sd.interval_image(sd.Affine(0.1, 0.8), sd.RealInterval(0.0, 1.0))
        assert img.lo == pytest.approx(0.1, abs=1e-12) and img.lo < 0.1
        assert img.hi == pytest.approx(0.9, abs=1e-12) and img.hi > 0.9

    def test_degenerate_interval(self):
        f = sd.Plateau(0.5, 0.4, 0.6)
        img = sd.interval_image(f, sd.RealInterval(0.2, 0.2))
        assert img.hi - img.lo <= 2 * EPS_ROUND + 1e-15
        assert img.contains(f.eval(0.2))

    def test_plateau_fixed_interval(self):
        img = sd.interval_image(sd.Plateau(0.5, 0.4, 0.6), sd.RealInterval(0.4, 0.6))
        assert img.lo == pytest.approx(0.4, abs=1e-12)
        assert img.hi == pytest.approx(0.6, abs=1e-12)

    def test_enclosure_property(self):
        rng = np.random.default_rng(3)
        for f in sample_maps():
            for _ in range(125):
                lo, hi = sorted(rng.uniform(0, 1, 2))
                iv = sd.RealInterval(lo, hi)
                img = sd.interval_image(f, iv)
                x = float(rng.uniform(lo, hi))
                assert img.contains(float(f.eval(x)))


class TestSerialization:
    def test_round_trip(self):
        for f in sample_maps():
            back = sd.map_from_json(sd.map_to_json(f))
            assert back == f

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            sd.map_from_json({"form": "cubic", "parameters": {}})
