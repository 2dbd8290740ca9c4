"""Tests for gibbs_exact.py: enumeration, log-partition, expectations."""

import math

import numpy as np
import pytest

import gibbs_exact
from gibbs_exact import (
    EnumerationCapError,
    SupportError,
    build_system,
    config_observable,
    edge_occurrence_rhs,
    expectation,
    free_energy,
    hamiltonian,
    log_partition,
    monomial_mean,
    normalization_error,
    restrict,
    statistic_moments,
)
from graph_core import Config, edge_count
from hamiltonians import ErgmParams, GeneralizedParams, ScalarParams
from meanfield import classify
from tests.conftest import EDGE_MEAN3, PAIR_MEAN3, Z3


class TestLogPartition:
    """Tests for log_partition and free_energy."""

    def test_k3_closed_form(self, k3_system):
        assert log_partition(k3_system) == pytest.approx(math.log(Z3), abs=1e-12)

    def test_free_energy(self, k3_system):
        assert free_energy(k3_system) == pytest.approx(math.log(Z3) / 9, abs=1e-12)

    def test_independent_edges(self):
        h = 0.37
        sys = build_system(4, ScalarParams(0.0, h))
        assert log_partition(sys) == pytest.approx(6 * math.log1p(math.exp(h)), abs=1e-12)

    def test_empty_active_set(self):
        sys = build_system(4, ScalarParams(2.0, 1.0), active=())
        assert log_partition(sys) == 0.0

    def test_large_field_is_finite(self):
        sys = build_system(3, ScalarParams(50.0, 200.0))
        assert log_partition(sys) == pytest.approx(3 * 200.0 + 50.0, rel=1e-12)

    def test_cap_exceeded(self):
        sys = build_system(4, ScalarParams(1.0, 0.0), cap=5)
        with pytest.raises(EnumerationCapError, match="mcmc"):
            log_partition(sys)

    def test_worker_count_does_not_change_result(self, monkeypatch):
        monkeypatch.setattr(gibbs_exact, "CHUNK_BITS", 3)
        serial = build_system(5, ScalarParams(1.2, -0.3))
        threaded = build_system(5, ScalarParams(1.2, -0.3), workers=4)
        assert log_partition(serial) == log_partition(threaded)
        assert statistic_moments(serial) == statistic_moments(threaded)

    def test_normalization(self, k4_system):
        assert normalization_error(k4_system) <= 1e-12


class TestHamiltonianEvaluation:
    """Tests for hamiltonian(c, sys)."""

    def test_full_k3(self, k3_system):
        assert hamiltonian(Config.full(3), k3_system) == pytest.approx(3.0)

    def test_config_outside_active_set(self):
        sys = build_system(4, ScalarParams(1.0, 0.0), active=(0, 1))
        with pytest.raises(SupportError):
            hamiltonian(Config.from_edges(4, [2]), sys)

    def test_wrong_vertex_count(self, k3_system):
        with pytest.raises(SupportError):
            hamiltonian(Config.empty(4), k3_system)


class TestExpectations:
    """Tests for expectation, monomial_mean and the dense table."""

    def test_k3_edge_mean(self, k3_system):
        for i in range(3):
            assert expectation(k3_system, [i]) == pytest.approx(EDGE_MEAN3, abs=1e-12)

    def test_k3_pair_mean(self, k3_system):
        assert monomial_mean(k3_system, [0, 2]) == pytest.approx(PAIR_MEAN3, abs=1e-12)

    def test_empty_monomial(self, k4_system):
        assert expectation(k4_system, []) == pytest.approx(1.0, abs=1e-12)

    def test_dense_matches_streaming(self, k4_system):
        for edges in ([0], [1, 4], [0, 3, 5], range(6)):
            assert monomial_mean(k4_system, edges) == pytest.approx(expectation(k4_system, edges), abs=1e-12)

    def test_inactive_monomial(self):
        sys = build_system(4, ScalarParams(1.0, 0.0), active=(0, 1, 2))
        with pytest.raises(SupportError):
            expectation(sys, [5])

    def test_config_observable(self, k4_system):
        lifted = config_observable(edge_count, 4)
        assert expectation(k4_system, lifted) == pytest.approx(
            statistic_moments(k4_system)["mean_edges"], abs=1e-12,
        )

    def test_edge_symmetry(self, k4_system):
        means = [monomial_mean(k4_system, [i]) for i in range(6)]
        assert max(means) - min(means) <= 1e-12

    def test_edge_symmetry_ergm(self):
        sys = build_system(4, ErgmParams.edge_triangle(-0.5, 1.5))
        means = [monomial_mean(sys, [i]) for i in range(6)]
        assert max(means) - min(means) <= 1e-12


class TestEdgeOccurrence:
    """Tests for the E[x_i] = E[sigma(gain_i)] identity."""

    def test_two_star(self, k4_system):
        for i in range(6):
            assert edge_occurrence_rhs(k4_system, i) == pytest.approx(
                monomial_mean(k4_system, [i]), abs=1e-12,
            )

    def test_generalized(self):
        gp = GeneralizedParams.uniform(4, 0.5, 0.0).with_alpha((0, 1), 2.0)
        sys = build_system(4, gp)
        for i in (0, 1, 5):
            assert edge_occurrence_rhs(sys, i) == pytest.approx(monomial_mean(sys, [i]), abs=1e-12)

    def test_ergm(self):
        sys = build_system(4, ErgmParams.edge_triangle(0.2, -0.8))
        assert edge_occurrence_rhs(sys, 2) == pytest.approx(monomial_mean(sys, [2]), abs=1e-12)

    def test_inactive_edge(self):
        sys = build_system(4, ScalarParams(1.0, 0.0), active=(0, 1))
        with pytest.raises(SupportError):
            edge_occurrence_rhs(sys, 3)


class TestEdgeMarginals:
    """Bounds and large-n behaviour of E[x_i]."""

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_at_least_half_for_nonnegative_parameters(self, n):
        for alpha in (0.0, 0.5, 1.0, 3.0):
            for h in (0.0, 0.5, 1.0):
                sys = build_system(n, ScalarParams(alpha, h))
                means = [monomial_mean(sys, [i]) for i in range(sys.k)]
                assert min(means) >= 0.5 - 1e-12, (n, alpha, h)

    def test_approaches_mean_field_fixed_point(self):
        u_star = classify(1.0, 0.0).u_star
        assert u_star == pytest.approx(0.8437, abs=1e-4)
        gaps = [abs(monomial_mean(build_system(n, ScalarParams(1.0, 0.0)), [0]) - u_star) for n in (3, 4, 5, 6)]
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:])), gaps


class TestStatisticMoments:
    """Tests for statistic_moments."""

    def test_independent_edges(self):
        h = -0.6
        p = 1 / (1 + math.exp(-h))
        moments = statistic_moments(build_system(4, ScalarParams(0.0, h)))
        assert moments["mean_edges"] == pytest.approx(6 * p, abs=1e-12)
        assert moments["var_edges"] == pytest.approx(6 * p * (1 - p), abs=1e-12)
        assert moments["mean_wedges"] == pytest.approx(12 * p * p, abs=1e-12)

    def test_k3(self, k3_system):
        moments = statistic_moments(k3_system)
        assert moments["mean_edges"] == pytest.approx(3 * EDGE_MEAN3, abs=1e-12)
        assert moments["mean_wedges"] == pytest.approx(3 * PAIR_MEAN3, abs=1e-12)


class TestRestrict:
    """Tests for restrict."""

    def test_subsystem_partition(self):
        sys = build_system(4, ScalarParams(0.0, 0.5))
        sub = restrict(sys, [0, 1])
        assert log_partition(sub) == pytest.approx(2 * math.log1p(math.exp(0.5)), abs=1e-12)

    def test_outside_parent(self):
        sys = build_system(4, ScalarParams(1.0, 0.0), active=(0, 1))
        with pytest.raises(SupportError):
            restrict(sys, [0, 4])

    def test_invalid_edge_id(self):
        with pytest.raises(SupportError):
            build_system(3, ScalarParams(1.0, 0.0), active=(0, 7))
