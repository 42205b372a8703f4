"""Monte Carlo samplers: exactness, uniformity, and the determinism contract."""

import math
from itertools import combinations

import numpy as np
import pytest
from scipy.stats import chisquare

from depbounds import simulate as sim
from depbounds.graphcomb import Graph, count_triangles

P_VALUE_FLOOR = 1e-4


class TestSampleGnp:
    def test_p_zero_and_one(self):
        assert sim.sample_gnp(6, 0.0, 1).edges == frozenset()
        assert sim.sample_gnp(6, 1.0, 1) == Graph.complete(6)

    def test_p_out_of_range(self):
        with pytest.raises(ValueError):
            sim.sample_gnp(5, 1.5, 0)

    def test_uniform_over_all_graphs(self):
        # G(4, 1/2) puts equal mass on all 64 labelled graphs
        counts = {}
        reps = 6400
        for seed in range(reps):
            g = sim.sample_gnp(4, 0.5, seed)
            key = tuple(sorted(g.edges))
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 64
        _, p = chisquare(list(counts.values()))
        assert p > P_VALUE_FLOOR


class TestSampleGnm:
    def test_edge_count_exact(self):
        for seed in range(20):
            g = sim.sample_gnm(7, 9, seed)
            assert len(g.edges) == 9

    def test_m_out_of_range(self):
        with pytest.raises(ValueError):
            sim.sample_gnm(4, 7, 0)

    def test_uniform_over_edge_sets(self):
        # G(5, 4) is uniform over the C(10,4) = 210 four-edge graphs
        counts = {}
        reps = 21000
        for seed in range(reps):
            g = sim.sample_gnm(5, 4, seed)
            key = tuple(sorted(g.edges))
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 210
        _, p = chisquare(list(counts.values()))
        assert p > P_VALUE_FLOOR

    def test_batch_model_matches_exact_tail(self):
        # isolated-vertex tail of G(6,5) against the rational oracle
        from depbounds.graphcomb import gnm_isolated_exact_tail

        model = sim.GnmIsolated(6, 5)
        res = sim.empirical_tail(model, 2, reps=40000, seed=11)
        exact = float(gnm_isolated_exact_tail(6, 5, 2))
        assert res.ci_low <= exact <= res.ci_high


class TestOrientationParity:
    def test_single_edge_complementary(self):
        g = Graph.from_edge_list(2, [(0, 1)])
        for seed in range(30):
            par = sim.sample_orientation_parity(g, seed)
            assert par.sum() == 1  # exactly one endpoint has in-degree 1

    def test_empty_graph(self):
        par = sim.sample_orientation_parity(Graph.empty(5), 0)
        assert par.tolist() == [0, 0, 0, 0, 0]

    def test_k4_parity_sum_is_even(self):
        # in-degrees sum to the edge count 6, so the parity sum is even
        model = sim.OrientationParity(Graph.complete(4))
        stats = model.batch(np.random.default_rng(3), 2000)
        assert np.all(stats % 2 == 0)

    def test_k4_three_vertex_parities_uniform(self):
        # parities of any 3 of the 4 vertices are independent fair bits
        g = Graph.complete(4)
        edges = sorted(g.edges)
        rng = np.random.default_rng(17)
        counts = np.zeros(8, dtype=int)
        reps = 8000
        flips = rng.random((reps, len(edges))) < 0.5
        indeg = np.zeros((reps, 4), dtype=np.int64)
        for j, (u, v) in enumerate(edges):
            indeg[:, v] += ~flips[:, j]
            indeg[:, u] += flips[:, j]
        par = indeg % 2
        codes = par[:, 0] * 4 + par[:, 1] * 2 + par[:, 2]
        for c in codes:
            counts[c] += 1
        _, p = chisquare(counts)
        assert p > P_VALUE_FLOOR


class TestMartingaleDiff:
    def test_range_constraint_held_surely(self):
        p_vec = (0.1, 0.5, 0.9, 0.3, 0.7)
        for kernel in sim.MDS_KERNELS:
            for seed in range(200):
                y = sim.sample_martingale_diff(5, p_vec, kernel, seed)
                assert np.all(y >= -np.array(p_vec) - 1e-12)
                assert np.all(y <= 1.0 - np.array(p_vec) + 1e-12)

    def test_conditional_mean_zero_statistically(self):
        model = sim.MartingaleDiff(8, (0.3,) * 8, kernel="polya-style")
        stats = model.batch(np.random.default_rng(5), 20000)
        # E[sum Y_i] = 0; each |Y_i| <= 3/8 so the sum has std <= ~1.1
        assert abs(stats.mean()) < 5 * 1.1 / math.sqrt(20000)

    def test_independent_centered_mean(self):
        model = sim.MartingaleDiff(6, (0.4,) * 6, kernel="independent-centered")
        stats = model.batch(np.random.default_rng(9), 20000)
        assert abs(stats.mean()) < 0.05

    def test_kernel_and_p_validation(self):
        with pytest.raises(ValueError):
            sim.sample_martingale_diff(3, (0.5, 0.5, 0.5), "nope", 0)
        with pytest.raises(ValueError):
            sim.sample_martingale_diff(3, (0.0, 0.5, 0.5), "polya-style", 0)
        with pytest.raises(ValueError):
            sim.sample_martingale_diff(3, (0.5, 0.5), "polya-style", 0)


class TestUStat:
    def test_all_below_c1_is_total_count(self):
        for seed in range(10):
            val = sim.sample_ustat(6, 2, "all-below", "uniform", seed, c=1.0)
            assert val == math.comb(6, 2)

    def test_all_below_mean(self):
        model = sim.UStat(6, 2, "all-below", "uniform", (("c", 0.5),))
        stats = model.batch(np.random.default_rng(1), 40000)
        want = math.comb(6, 2) * 0.5**2
        assert stats.mean() == pytest.approx(want, abs=0.1)

    def test_triangle_indicator_matches_graph_count(self):
        for seed in range(10):
            val = sim.sample_ustat(
                6, 3, "triangle-indicator", "gnp", seed, p=0.5
            )
            g = sim.sample_gnp(6, 0.5, seed)
            assert val == count_triangles(g)

    def test_threshold_sum_extremes(self):
        assert (
            sim.sample_ustat(4, 2, "threshold-sum", "uniform", 0, theta=0.0)
            == math.comb(4, 2)
        )
        assert (
            sim.sample_ustat(4, 2, "threshold-sum", "uniform", 0, theta=5.0)
            == 0.0
        )

    def test_divisibility_and_kernel_errors(self):
        with pytest.raises(ValueError):
            sim.sample_ustat(7, 2, "all-below", "uniform", 0, c=0.5)
        with pytest.raises(ValueError):
            sim.sample_ustat(6, 2, "mystery", "uniform", 0)
        with pytest.raises(ValueError):
            sim.sample_ustat(6, 3, "triangle-indicator", "uniform", 0, p=0.5)


class TestEmpiricalTail:
    def test_threshold_at_or_below_min_gives_one(self):
        model = sim.GnpIsolated(8, 0.2)
        res = sim.empirical_tail(model, 0, reps=500, seed=0)
        assert res.empirical_tail == 1.0
        assert res.ci_high == 1.0

    def test_ci_brackets_point_estimate(self):
        model = sim.GnpTriangles(7, 0.4)
        res = sim.empirical_tail(model, 3, reps=5000, seed=2)
        assert res.ci_low <= res.empirical_tail <= res.ci_high

    def test_deterministic_across_runs_and_threads(self):
        model = sim.GnmTriangles(7, 10)
        base = sim.empirical_tail(model, 4, reps=10000, seed=42, threads=1)
        for threads in (2, 4):
            again = sim.empirical_tail(
                model, 4, reps=10000, seed=42, threads=threads
            )
            assert again.dumps() == base.dumps()
        repeat = sim.empirical_tail(model, 4, reps=10000, seed=42, threads=1)
        assert repeat.dumps() == base.dumps()

    def test_seed_changes_result(self):
        model = sim.GnpIsolated(10, 0.3)
        a = sim.empirical_tail(model, 3, reps=3000, seed=0)
        b = sim.empirical_tail(model, 3, reps=3000, seed=1)
        assert a.dumps() != b.dumps()

    def test_partial_final_chunk(self):
        # reps not a multiple of the chunk size still covers every draw
        model = sim.GnpIsolated(6, 0.5)
        res = sim.empirical_tail(model, 0, reps=sim.CHUNK_SIZE + 7, seed=0)
        assert res.replications == sim.CHUNK_SIZE + 7
        assert res.empirical_tail == 1.0

    def test_reps_validation(self):
        with pytest.raises(ValueError):
            sim.empirical_tail(sim.GnpIsolated(5, 0.5), 1, reps=0, seed=0)

    def test_sum_mean_tracks_expectation(self):
        # E[isolated vertices in G(10, 0.3)] = 10 * 0.7^9
        model = sim.GnpIsolated(10, 0.3)
        res = sim.empirical_tail(model, 3, reps=30000, seed=7)
        assert res.sum_mean == pytest.approx(10 * 0.7**9, abs=0.05)


class TestExactBinomialCI:
    def test_zero_successes(self):
        lo, hi = sim.exact_binomial_ci(0, 100)
        assert lo == 0.0
        assert 0.0 < hi < 0.1

    def test_all_successes(self):
        lo, hi = sim.exact_binomial_ci(100, 100)
        assert hi == 1.0
        assert 0.9 < lo < 1.0

    def test_coverage_against_exact_binomial(self):
        # interval inversion: the CI contains p whenever the observed count
        # is not in the extreme alpha/2 tails of Bin(n, p)
        from fractions import Fraction

        n, p = 50, 0.2
        # total probability of non-coverage is below the 0.001 budget
        pmf = [
            float(
                Fraction(math.comb(n, i)) * Fraction(1, 5) ** i
                * Fraction(4, 5) ** (n - i)
            )
            for i in range(n + 1)
        ]
        noncover = sum(
            pmf[k]
            for k in range(n + 1)
            if not sim.exact_binomial_ci(k, n)[0] <= p <= sim.exact_binomial_ci(k, n)[1]
        )
        assert noncover <= 0.001 + 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            sim.exact_binomial_ci(5, 4)
