"""Uniform-attachment growth, fixtures, and empirical histograms."""

import numpy as np
import pytest

from wormtree.analytic import children_dist, generation_dist, harmonic
from wormtree.growth import (
    NO_PARENT,
    aggregate_runs,
    empirical_children_dist,
    empirical_generation_dist,
    grow_uniform,
    make_chain,
    make_star,
)
from wormtree.rng import RngStream


class TestGrowUniform:
    def test_single_node(self):
        f = grow_uniform(1, RngStream(1))
        f.validate()
        assert f.node_count == 1
        assert f.parent[0] == NO_PARENT
        assert f.generation[0] == 0
        assert f.children_count[0] == 0

    def test_two_nodes_forced(self):
        f = grow_uniform(2, RngStream(7))
        f.validate()
        assert f.parent[1] == 0
        assert f.generation[1] == 1

    def test_invariants_hold(self):
        for seed in range(5):
            f = grow_uniform(500, RngStream(seed))
            f.validate()

    def test_deterministic_per_stream(self):
        a = grow_uniform(2000, RngStream(42, 3))
        b = grow_uniform(2000, RngStream(42, 3))
        assert a.fingerprint() == b.fingerprint()
        c = grow_uniform(2000, RngStream(42, 4))
        assert a.fingerprint() != c.fingerprint()

    def test_parent_always_earlier(self):
        f = grow_uniform(300, RngStream(9))
        ids = np.arange(300)
        assert np.all(f.parent[1:] < ids[1:])

    def test_leaf_share_near_half(self):
        dists = [
            empirical_children_dist(grow_uniform(2000, RngStream(11, r))) for r in range(100)
        ]
        agg = aggregate_runs(dists)
        se = agg.stderr[0]
        assert abs(agg.mean[0] - 0.5) < 3 * se

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            grow_uniform(0, RngStream(0))


class TestFixtures:
    def test_chain_shape(self):
        f = make_chain(3)
        f.validate()
        assert f.generation.tolist() == [0, 1, 2]
        assert f.children_count.tolist() == [1, 1, 0]

    def test_star_shape(self):
        f = make_star(3)
        f.validate()
        assert f.generation.tolist() == [0, 1, 1]
        assert f.children_count.tolist() == [2, 0, 0]

    def test_chain_histograms(self):
        n = 40
        cd = empirical_children_dist(make_chain(n))
        assert cd.mass[1] == pytest.approx((n - 1) / n)
        assert cd.mass[0] == pytest.approx(1 / n)
        gd = empirical_generation_dist(make_chain(n))
        np.testing.assert_allclose(gd.mass, np.full(n, 1 / n))
        assert gd.mean() == pytest.approx((n - 1) / 2)

    def test_star_histograms(self):
        n = 40
        cd = empirical_children_dist(make_star(n))
        assert cd.mass[0] == pytest.approx((n - 1) / n)
        assert cd.mass[n - 1] == pytest.approx(1 / n)
        gd = empirical_generation_dist(make_star(n))
        assert gd.mass[0] == pytest.approx(1 / n)
        assert gd.mass[1] == pytest.approx((n - 1) / n)
        assert gd.mean() == pytest.approx((n - 1) / n)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            make_chain(0)
        with pytest.raises(ValueError):
            make_star(0)


class TestEmpiricalDists:
    def test_mean_children_is_edge_share(self):
        for n in (1, 2, 17, 400):
            f = grow_uniform(n, RngStream(5, n))
            d = empirical_children_dist(f)
            assert d.mean() == pytest.approx((n - f.root_count) / n, abs=1e-12)

    def test_matches_recursion_at_scale(self):
        reps = 100
        n = 20000
        dists = [empirical_children_dist(grow_uniform(n, RngStream(123, r))) for r in range(reps)]
        agg = aggregate_runs(dists)
        exact = children_dist(n, i_max=len(agg.mean) - 1).mass
        for i in range(16):
            se = max(agg.stderr[i], 1e-12)
            assert abs(agg.mean[i] - exact[i]) < 3 * se

    def test_generation_mean_tracks_harmonic(self):
        reps = 100
        n = 5000
        means = [
            empirical_generation_dist(grow_uniform(n, RngStream(321, r))).mean()
            for r in range(reps)
        ]
        sample = np.asarray(means)
        se = sample.std(ddof=1) / np.sqrt(reps)
        assert abs(sample.mean() - (harmonic(n) - 1.0)) < 3 * se


class TestAggregateRuns:
    def test_single_run_passthrough(self):
        d = empirical_children_dist(make_chain(10))
        agg = aggregate_runs([d])
        np.testing.assert_allclose(agg.mean, d.mass)
        assert np.all(agg.std == 0.0)

    def test_identical_runs_have_zero_std(self):
        d = empirical_children_dist(make_star(10))
        agg = aggregate_runs([d, d, d])
        assert np.all(agg.std < 1e-15)

    def test_hand_case(self):
        from wormtree.analytic import CHILDREN, MarginalDist

        a = MarginalDist(n=2, kind=CHILDREN, mass=np.array([0.4, 0.6]))
        b = MarginalDist(n=2, kind=CHILDREN, mass=np.array([0.6, 0.4]))
        agg = aggregate_runs([a, b])
        np.testing.assert_allclose(agg.mean, [0.5, 0.5])
        np.testing.assert_allclose(agg.std, [np.sqrt(0.02)] * 2)

    def test_pads_to_longest(self):
        short = empirical_generation_dist(make_star(4))
        long = empirical_generation_dist(make_chain(4))
        agg = aggregate_runs([short, long])
        assert len(agg.mean) == 4

    def test_mixed_kinds_rejected(self):
        c = empirical_children_dist(make_chain(4))
        g = empirical_generation_dist(make_chain(4))
        with pytest.raises(ValueError):
            aggregate_runs([c, g])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_runs([])


class TestForestCsv:
    def test_schema(self, tmp_path):
        path = tmp_path / "forest.csv"
        make_star(3).to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "node_id,parent_id,generation,birth_tick"
        assert lines[1] == "0,-1,0,0"
        assert lines[2] == "1,0,1,1"
