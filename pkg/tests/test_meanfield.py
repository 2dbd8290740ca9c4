"""Tests for meanfield.py: fixed points, phases, coexistence curve, variance."""

import math

import pytest

from meanfield import (
    MeanFieldError,
    classify,
    critical_curve,
    curvature,
    entropy,
    finite_size_fixed_point,
    fixed_points,
    limiting_variance,
    objective,
    phase_grid,
    residual,
    variance_finite_difference,
)


class TestObjective:
    """Tests for entropy and objective."""

    def test_entropy_endpoints(self):
        assert entropy(0.0) == 0.0
        assert entropy(1.0) == 0.0

    def test_entropy_half(self):
        assert entropy(0.5) == pytest.approx(-math.log(2))

    def test_outside_unit_interval(self):
        with pytest.raises(MeanFieldError):
            objective(1.2, 1.0, 0.0)
        with pytest.raises(MeanFieldError):
            entropy(-0.1)

    def test_symmetry_at_h_minus_alpha(self):
        for u in (0.1, 0.3, 0.45):
            assert objective(u, 3.0, -3.0) == pytest.approx(objective(1 - u, 3.0, -3.0), abs=1e-14)


class TestFixedPoints:
    """Tests for fixed_points."""

    def test_three_roots(self):
        roots = fixed_points(3.0, -3.0)
        assert len(roots) == 3
        assert roots[0] == pytest.approx(0.0707, abs=1e-4)
        assert roots[1] == 0.5
        assert roots[2] == pytest.approx(0.9293, abs=1e-4)
        assert roots[0] + roots[2] == pytest.approx(1.0, abs=1e-10)

    def test_residuals_vanish(self):
        for alpha, h in ((1.0, 0.0), (3.0, -3.0), (0.5, -2.0), (4.0, -3.5)):
            for root in fixed_points(alpha, h):
                assert abs(residual(root, alpha, h)) <= 1e-10

    def test_no_coupling(self):
        roots = fixed_points(0.0, 1.0)
        assert roots == [pytest.approx(1 / (1 + math.exp(-1)), abs=1e-12)]

    def test_unique_below_critical_alpha(self):
        for h in (-3.0, -1.0, 0.0, 1.0):
            assert len(fixed_points(1.5, h)) == 1


class TestClassify:
    """Tests for classify."""

    def test_unique(self):
        point = classify(1.0, 0.0)
        assert point.classification == "unique"
        assert point.u_star == pytest.approx(0.8437, abs=1e-4)

    def test_coexistence(self):
        point = classify(3.0, -3.0)
        assert point.classification == "coexistence"
        assert len(point.maximizers) == 2
        assert point.maximizers[0] == pytest.approx(0.0707, abs=1e-4)

    def test_critical_point(self):
        point = classify(2.0, -2.0)
        assert point.classification == "critical"
        assert point.u_star == pytest.approx(0.5, abs=1e-3)
        assert point.variances == (None,)

    def test_three_roots_one_maximizer(self):
        point = classify(4.0, -3.5)
        assert len(point.roots) == 3
        assert point.classification == "unique"
        assert point.u_star > 0.5

    def test_record_columns(self):
        record = classify(3.0, -3.0).to_record()
        assert list(record) == ["alpha", "h", "n_roots", "u_star_1", "u_star_2", "classification", "variance"]
        assert record["n_roots"] == 3
        assert record["variance"] is None

    def test_curvature_positive_at_maximizer(self):
        point = classify(1.0, 0.0)
        assert curvature(point.u_star, 1.0) > 0


class TestCriticalCurve:
    """Tests for critical_curve."""

    def test_symmetric_value(self):
        sample = critical_curve(3.0)
        assert sample.q == pytest.approx(-3.0, abs=1e-6)
        assert abs(sample.objective_gap) <= 1e-10

    def test_other_alpha(self):
        for alpha in (2.5, 4.0):
            assert critical_curve(alpha).q == pytest.approx(-alpha, abs=1e-6)

    def test_alpha_too_small(self):
        with pytest.raises(MeanFieldError):
            critical_curve(2.0)
        with pytest.raises(MeanFieldError):
            critical_curve(1.0)


class TestVariance:
    """Tests for limiting_variance."""

    def test_reference_value(self):
        assert limiting_variance(1.0, 0.0) == pytest.approx(0.179, abs=1e-3)

    def test_matches_finite_difference(self):
        for alpha, h in ((1.0, 0.0), (0.5, -1.0), (3.0, 1.0)):
            assert limiting_variance(alpha, h) == pytest.approx(
                variance_finite_difference(alpha, h), abs=1e-6,
            )

    def test_independent_edges(self):
        p = 1 / (1 + math.exp(-0.4))
        assert limiting_variance(0.0, 0.4) == pytest.approx(p * (1 - p), abs=1e-10)

    def test_positive_on_grid(self):
        for point in phase_grid([0.0, 1.0, 2.5], [-2.0, -0.5, 1.0]):
            if point.classification == "unique":
                assert point.variances[0] > 0

    def test_undefined_at_coexistence(self):
        with pytest.raises(MeanFieldError):
            limiting_variance(3.0, -3.0)


class TestPhaseGrid:
    """Tests for phase_grid."""

    def test_order(self):
        points = phase_grid([0.0, 1.0], [-1.0, 0.0, 1.0])
        assert [(p.alpha, p.h) for p in points] == [
            (0.0, -1.0), (0.0, 0.0), (0.0, 1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0),
        ]

    def test_workers(self):
        serial = phase_grid([1.0, 3.0], [-3.0, 0.0])
        threaded = phase_grid([1.0, 3.0], [-3.0, 0.0], workers=3)
        assert [p.to_record() for p in serial] == [p.to_record() for p in threaded]


class TestFiniteSize:
    """Tests for finite_size_fixed_point."""

    def test_converges_to_limit(self):
        gaps = [abs(finite_size_fixed_point(n, 1.0, 0.0) - classify(1.0, 0.0).u_star) for n in (10, 100, 1000)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3

    def test_k2_has_no_partners(self):
        assert finite_size_fixed_point(2, 5.0, 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_invalid_n(self):
        with pytest.raises(MeanFieldError):
            finite_size_fixed_point(1, 1.0, 0.0)
