"""Tests for verifiers/duplication.py: doubled variables, sectors, mixture weights."""

import math

import pytest

from gibbs_exact import EnumerationCapError, build_system
from graph_core import Config
from hamiltonians import ErgmParams, ScalarParams
from verifiers import (
    DoubledState,
    NestingError,
    check_decomposition,
    doubled_expectation,
    mixture_expectation,
    mixture_weights,
    to_zv,
    ursell,
    verify_ising_submodularity,
    verify_P_lattice,
    verify_sector_monotonicity,
    verify_u3_representation,
    verify_u3_representation_all,
    verify_zv_inequalities,
)
from verifiers.duplication import (
    build_sector,
    ising_subsystem,
    product,
    sector_ising_mean,
    sector_of,
    shifted_two_star,
)


class TestDoubledStates:
    """Tests for the z/v change of variables."""

    def test_to_zv(self):
        s = DoubledState(Config(3, (1, 1, 0)), Config(3, (0, 1, 0)))
        z, v = to_zv(s)
        assert z.z == (1, 0, 0)
        assert v.v == (0.5, 1.0, 0.0)

    def test_sector_of(self):
        s = DoubledState(Config(3, (1, 1, 0)), Config(3, (0, 1, 0)))
        assert sector_of(s) == frozenset({1, 2})

    def test_mismatched_copies(self):
        with pytest.raises(ValueError):
            DoubledState(Config.empty(3), Config.empty(4))


class TestDecomposition:
    """Tests for check_decomposition."""

    def test_k3_with_field(self, k3_field_system):
        report = check_decomposition(k3_field_system)
        assert report.passed
        assert report.checked == 64

    def test_k4(self, k4_system):
        assert check_decomposition(k4_system).passed

    def test_cap(self):
        with pytest.raises(EnumerationCapError):
            check_decomposition(build_system(6, ScalarParams(1.0, 0.0)))

    def test_ergm_rejected(self):
        with pytest.raises(ValueError):
            check_decomposition(build_system(3, ErgmParams.two_star(0.0, 1.0)))


class TestSectors:
    """Tests for the Ising and shifted two-star subsystems."""

    def test_shifted_fields_and_constant(self, k3_field_system):
        shifted, constant = shifted_two_star(k3_field_system, [0])
        # two partners of edge 0 lie in the complement, each adding alpha / n = 1
        assert shifted.params.h_vec[0] == pytest.approx(4.0)
        assert shifted.active == (0,)
        # one wedge inside the complement (alpha / 2n) plus two fields
        assert constant == pytest.approx(2.5)

    def test_ising_couplings(self, k3_field_system):
        ising = ising_subsystem(k3_field_system, [1, 2])
        beta = 3.0 / 6
        assert ising.log_partition() == pytest.approx(math.log(2 * math.exp(beta) + 2 * math.exp(-beta)))

    def test_single_spin_average_vanishes(self, k3_field_system):
        sector = build_sector(k3_field_system, [2])
        assert sector_ising_mean(k3_field_system, sector, [0]) == pytest.approx(0.0, abs=1e-15)


class TestMixtureWeights:
    """Tests for mixture_weights."""

    def test_sum_to_one(self, k3_system):
        assert mixture_weights(k3_system).total() == pytest.approx(1.0, abs=1e-12)

    def test_sum_to_one_with_field(self, k4_system):
        assert mixture_weights(k4_system).total() == pytest.approx(1.0, abs=1e-12)

    def test_free_closed_form(self):
        h, m = 0.7, 3
        weights = mixture_weights(build_system(3, ScalarParams(0.0, h)))
        for A in ([], [0], [1, 2], [0, 1, 2]):
            comp = m - len(A)
            expected = (
                2 ** comp * math.exp(comp * h) * (1 + math.exp(2 * h)) ** len(A)
                / (1 + math.exp(h)) ** (2 * m)
            )
            assert weights.of(A) == pytest.approx(expected, rel=1e-12)

    def test_all_diagonal_sector(self):
        weights = mixture_weights(build_system(3, ScalarParams(0.0, 0.0)))
        assert weights.of([0, 1, 2]) == pytest.approx(2 ** -3, rel=1e-12)

    def test_workers_keep_order(self):
        serial = mixture_weights(build_system(3, ScalarParams(2.0, 0.5)))
        threaded = mixture_weights(build_system(3, ScalarParams(2.0, 0.5), workers=4))
        assert serial.log_probs.tolist() == threaded.log_probs.tolist()

    def test_cap(self):
        with pytest.raises(EnumerationCapError):
            mixture_weights(build_system(6, ScalarParams(1.0, 0.0)))


class TestMixtureExpectation:
    """Tests for mixture_expectation against direct doubled enumeration."""

    def test_normalization(self, k3_system):
        assert mixture_expectation(k3_system, (), ()) == pytest.approx(1.0, abs=1e-12)

    def test_single_z_vanishes(self, k4_system):
        assert mixture_expectation(k4_system, [3], ()) == pytest.approx(0.0, abs=1e-12)

    def test_matches_doubled_enumeration(self, k3_field_system):
        phi, psi = [0, 1], [2]
        assert mixture_expectation(k3_field_system, phi, psi) == pytest.approx(
            doubled_expectation(k3_field_system, phi, psi), abs=1e-10,
        )

    def test_battery_k4(self, k4_system):
        weights = mixture_weights(k4_system)
        battery = [([0], [1]), ([0, 5], [2]), ([1, 2], [1, 2]), ([], [0, 3, 4]), ([0, 1, 2], [])]
        for phi, psi in battery:
            assert mixture_expectation(k4_system, phi, psi, weights) == pytest.approx(
                doubled_expectation(k4_system, phi, psi), abs=1e-10,
            ), (phi, psi)

    def test_v_mean_is_edge_mean(self, k4_system):
        assert doubled_expectation(k4_system, (), [2]) == pytest.approx(ursell(k4_system, [2]).value, abs=1e-12)


class TestZvInequalities:
    """Tests for verify_zv_inequalities."""

    def test_empty_c(self, k3_field_system):
        report = verify_zv_inequalities(k3_field_system, [], [2])
        assert report.worst_violation == pytest.approx(0.0, abs=1e-12)

    def test_strict(self, k3_field_system):
        report = verify_zv_inequalities(k3_field_system, [0, 1], [2])
        assert report.passed
        assert report.extra["zv_violation"] < -1e-6

    def test_k4(self, k4_system):
        assert verify_zv_inequalities(k4_system, [0, 1], [5]).passed


class TestU3Representation:
    """Tests for the z/v representation of u3."""

    def test_single_triple(self, k3_field_system):
        report = verify_u3_representation(k3_field_system, 0, 1, 2)
        assert report.passed
        assert report.extra["u3"] <= 0

    def test_free_diagonal(self):
        report = verify_u3_representation(build_system(3, ScalarParams(0.0, 0.0)), 1, 1, 1)
        assert report.extra["u3"] == pytest.approx(0.0, abs=1e-15)
        assert report.passed

    def test_all_triples_k4(self, k4_system):
        report = verify_u3_representation_all(k4_system)
        assert report.passed
        assert report.checked == 216

    def test_product_repeats_index(self):
        import numpy as np

        z = np.array([[1.0, -1.0, 0.0]])
        assert product([1], [1])(z).tolist() == [1.0]


class TestSectorMonotonicity:
    """Tests for verify_sector_monotonicity."""

    def test_k3_example(self, k3_field_system):
        report = verify_sector_monotonicity(k3_field_system, [0, 1], [2], [2], [1, 2])
        assert report.passed
        assert report.extra["f_large"] == pytest.approx(0.0, abs=1e-15)

    def test_equal_sectors(self, k3_field_system):
        report = verify_sector_monotonicity(k3_field_system, [0], [1], [1], [1])
        assert report.worst_violation == pytest.approx(0.0, abs=1e-15)

    def test_nesting_violated(self, k3_field_system):
        with pytest.raises(NestingError):
            verify_sector_monotonicity(k3_field_system, [0], [1], [1, 2], [2])


class TestPLattice:
    """Tests for verify_P_lattice and the Ising lattice inequality."""

    def test_k3_exhaustive(self, k3_field_system):
        report = verify_P_lattice(mixture_weights(k3_field_system))
        assert report.passed
        assert report.checked == 64
        assert report.extra["mode"] == "exhaustive"

    def test_free_uniform(self):
        report = verify_P_lattice(mixture_weights(build_system(3, ScalarParams(0.0, 0.0))))
        assert report.worst_violation == pytest.approx(0.0, abs=1e-12)

    def test_k4(self, k4_system):
        assert verify_P_lattice(mixture_weights(k4_system)).passed

    def test_ising_submodularity_exhaustive(self, k4_system):
        report = verify_ising_submodularity(k4_system)
        assert report.passed
        assert report.checked == 64 ** 2

    def test_ising_submodularity_pair(self, k4_system):
        assert verify_ising_submodularity(k4_system, [0, 1], [1, 3]).passed


class TestDuplicationGrid:
    """Mixture weights, the u3 representation and the lattice condition over a parameter grid."""

    @pytest.mark.parametrize("n", [3, pytest.param(4, marks=pytest.mark.slow)])
    def test_grid(self, n):
        battery = [([0], [1]), ([0, 1], [2]), ([1, 2], [1, 2]), ([], [0, 2])]
        for alpha in (0.5, 1.0, 3.0):
            for h in (0.0, 0.5, 1.0):
                sys = build_system(n, ScalarParams(alpha, h))
                weights = mixture_weights(sys)
                assert abs(weights.total() - 1.0) <= 1e-10, (n, alpha, h)
                for phi, psi in battery:
                    assert mixture_expectation(sys, phi, psi, weights) == pytest.approx(
                        doubled_expectation(sys, phi, psi), abs=1e-10,
                    ), (n, alpha, h, phi, psi)
                u3 = verify_u3_representation_all(sys)
                assert u3.passed and u3.max_error <= 1e-12, (n, alpha, h, u3.max_error)
                assert u3.checked == sys.k ** 3
                lattice = verify_P_lattice(weights)
                assert lattice.extra["mode"] == "exhaustive"
                assert lattice.passed, (n, alpha, h, lattice.worst_violation)
