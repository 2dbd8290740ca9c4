"""Tests for mcmc.py: heat-bath dynamics, chain statistics, scans."""

import itertools
import math

import numpy as np
import pytest

from graph_core import Config, build_edge_index, edge_count
from hamiltonians import ScalarParams
from mcmc import (
    ChainSpec,
    coexistence_histogram,
    concavity_scan,
    conditional_prob,
    exact_oracle,
    glauber_sweep,
    matching_rounds,
    run_chains,
)
from meanfield import classify, finite_size_fixed_point, limiting_variance
from tests.conftest import EDGE_MEAN3


class TestConditionalProb:
    """Tests for conditional_prob."""

    def test_both_partners_present(self):
        p = conditional_prob(Config.full(3), 0, ScalarParams(3.0, 0.0))
        assert p == pytest.approx(1 / (1 + math.exp(-2.0)))

    def test_independent_of_own_state(self):
        params = ScalarParams(2.0, -0.5)
        on = Config.from_edges(4, [0, 1, 3])
        off = Config.from_edges(4, [1, 3])
        assert conditional_prob(on, 0, params) == conditional_prob(off, 0, params)

    def test_empty_graph(self):
        p = conditional_prob(Config.empty(5), 4, ScalarParams(10.0, 0.3))
        assert p == pytest.approx(1 / (1 + math.exp(-0.3)))


class TestMatchingRounds:
    """Tests for the round-robin edge schedule."""

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 11])
    def test_partition_of_edges(self, n):
        rounds = matching_rounds(n)
        ids = np.concatenate(rounds)
        assert sorted(ids.tolist()) == list(range(build_edge_index(n).m))

    @pytest.mark.parametrize("n", [4, 5, 8, 11])
    def test_rounds_are_matchings(self, n):
        idx = build_edge_index(n)
        for R in matching_rounds(n):
            vertices = list(itertools.chain.from_iterable(idx.pair_of(int(e)) for e in R))
            assert len(vertices) == len(set(vertices))

    def test_round_count(self):
        assert len(matching_rounds(6)) == 5
        assert len(matching_rounds(7)) == 7


class TestGlauberSweep:
    """Tests for glauber_sweep."""

    def test_reproducible(self):
        params = ScalarParams(1.0, 0.0)
        a = glauber_sweep(Config.empty(6), params, np.random.default_rng(3))
        b = glauber_sweep(Config.empty(6), params, np.random.default_rng(3))
        assert a == b

    def test_strong_field_fills_graph(self):
        c = Config.empty(5)
        rng = np.random.default_rng(0)
        for _ in range(20):
            c = glauber_sweep(c, ScalarParams(0.0, 40.0), rng)
        assert edge_count(c) == 10

    def test_long_run_edge_density_on_triangle(self):
        params = ScalarParams(3.0, 0.0)
        rng = np.random.default_rng(5)
        c = Config.empty(3)
        for _ in range(200):
            c = glauber_sweep(c, params, rng)
        counts = []
        for _ in range(20_000):
            c = glauber_sweep(c, params, rng)
            counts.append(edge_count(c))
        assert np.mean(counts) / 3 == pytest.approx(EDGE_MEAN3, abs=0.02)


class TestChainSpec:
    """Tests for ChainSpec validation and schedules."""

    def test_burn_in_not_below_sweeps(self):
        with pytest.raises(ValueError):
            ChainSpec(n=5, alpha=1.0, h=0.0, sweeps=100, burn_in=100)

    def test_bad_schedule(self):
        with pytest.raises(ValueError):
            ChainSpec(n=5, alpha=1.0, h=0.0, sweeps=100, burn_in=10, schedule="sequential")

    def test_bad_thinning(self):
        with pytest.raises(ValueError):
            ChainSpec(n=5, alpha=1.0, h=0.0, sweeps=100, burn_in=10, thinning=0)

    def test_auto_schedule(self):
        assert ChainSpec(n=10, alpha=1.0, h=0.0, sweeps=2, burn_in=1).resolved_schedule == "random"
        assert ChainSpec(n=40, alpha=1.0, h=0.0, sweeps=2, burn_in=1).resolved_schedule == "matching"


class TestRunChains:
    """Tests for run_chains and its statistics."""

    def _spec(self, **kw):
        base = dict(n=4, alpha=1.0, h=0.5, sweeps=3_000, burn_in=500, thinning=5, seed=11, chains=16)
        base.update(kw)
        return ChainSpec(**base)

    def test_reproducible(self):
        spec = self._spec(sweeps=200, burn_in=50, chains=3)
        a, b = run_chains(spec), run_chains(spec)
        assert np.array_equal(a.edges, b.edges)
        assert a.stats == b.stats

    def test_sample_count(self):
        summary = run_chains(self._spec(sweeps=200, burn_in=50, thinning=10, chains=3))
        assert summary.edges.shape == (3, 15)
        assert summary.stats["samples"] == 45

    def test_wedges_match_degrees(self):
        summary = run_chains(self._spec(sweeps=50, burn_in=10, chains=2))
        assert (summary.wedges <= 12).all()
        assert (summary.wedges[summary.edges == 6] == 12).all()

    def test_single_chain_batch_means(self):
        summary = run_chains(self._spec(sweeps=600, burn_in=100, chains=1))
        assert math.isfinite(summary.stats["se_edges"])

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("alpha, h", [(0.0, 0.5), (1.0, 0.5), (3.0, 0.0)])
    def test_exact_oracle(self, n, alpha, h):
        summary = run_chains(self._spec(n=n, alpha=alpha, h=h, chains=32))
        oracle = exact_oracle(summary)
        assert abs(oracle["z_edges"]) < 3, oracle
        assert abs(oracle["z_wedges"]) < 3, oracle

    def test_exact_oracle_matching_schedule(self):
        summary = run_chains(self._spec(schedule="matching", chains=32))
        oracle = exact_oracle(summary)
        assert abs(oracle["z_edges"]) < 3, oracle
        assert abs(oracle["z_wedges"]) < 3, oracle

    def test_full_start(self):
        summary = run_chains(self._spec(sweeps=20, burn_in=0, thinning=1, chains=2, init="full", alpha=0.0, h=50.0))
        assert (summary.edges == 6).all()


@pytest.mark.slow
class TestDeskScale:
    """Law of large numbers and fluctuations at n = 100."""

    def test_lln_and_clt(self):
        spec = ChainSpec(n=100, alpha=1.0, h=0.0, sweeps=3_000, burn_in=1_000, thinning=10, seed=2024, chains=32)
        stats = run_chains(spec).stats
        assert stats["mean_edge_prob"] == pytest.approx(finite_size_fixed_point(100, 1.0, 0.0), abs=3e-3)
        assert stats["mean_edge_prob"] == pytest.approx(classify(1.0, 0.0).u_star, abs=1e-2)
        assert stats["std_variance"] == pytest.approx(limiting_variance(1.0, 0.0), rel=0.2)
        assert abs(stats["skewness"]) < 0.2


class TestConcavityScan:
    """Tests for concavity_scan."""

    @pytest.mark.parametrize("n", [4, 5])
    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
    def test_exact_grid(self, n, alpha):
        assert concavity_scan(alpha, [k / 4 for k in range(9)], n).passed

    def test_exact_nonnegative_field(self):
        scan = concavity_scan(1.0, [0.0, 0.5, 1.0, 1.5, 2.0], 4)
        assert scan.passed
        assert scan.points[0].second_difference is None
        assert scan.points[2].second_difference < 0

    def test_exact_negative_field_is_convex(self):
        scan = concavity_scan(0.0, [-3.0, -2.0, -1.0], 3)
        assert not scan.passed

    def test_density_increasing(self):
        scan = concavity_scan(2.0, [-1.0, 0.0, 1.0], 4)
        densities = [p.edge_density for p in scan.points]
        assert densities == sorted(densities)

    def test_mcmc_mode(self):
        template = ChainSpec(n=5, alpha=1.0, h=0.0, sweeps=400, burn_in=100, thinning=5, seed=5, chains=4)
        scan = concavity_scan(1.0, [0.0, 1.0, 2.0], 5, mode="mcmc", chain_template=template)
        assert scan.passed
        assert scan.points[1].second_difference_se > 0

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            concavity_scan(1.0, [0.0], 4, mode="guess")


class TestCoexistenceHistogram:
    """Tests for coexistence_histogram."""

    def test_counts_and_maximizers(self):
        hist = coexistence_histogram(3.0, 6, sweeps=60, chains=2, burn_in=20, thinning=10, bins=10)
        assert hist.h == pytest.approx(-3.0, abs=1e-6)
        assert hist.counts.sum() == 2 * 2 * 4
        assert len(hist.maximizers) == 2
        assert len(hist.to_records()) == 10
