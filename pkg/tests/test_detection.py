"""Random vs targeted inspection on forests."""

import numpy as np
import pytest

from wormtree.approx import detect_random, detect_targeted
from wormtree.detection import detect_random_on, detect_targeted_on, reports_to_csv
from wormtree.growth import grow_uniform, make_chain, make_star
from wormtree.rng import RngStream


class TestExposureSemantics:
    def test_full_access_exposes_everyone(self):
        f = grow_uniform(100, RngStream(1))
        rep = detect_random_on(f, 1.0, RngStream(2))
        assert rep.exposed_fraction == 1.0
        assert rep.accessed_count == 100

    def test_star_root_access_exposes_everyone(self):
        f = make_star(64)
        # the root always wins the children tie-break
        rep = detect_targeted_on(f, 1 / 64, RngStream(3))
        assert rep.accessed_count == 1
        assert rep.exposed_fraction == 1.0

    def test_chain_hand_enumeration(self):
        f = make_chain(100)
        rep = detect_targeted_on(f, 0.05, RngStream(4))
        # interior nodes expose themselves, one parent, one child each;
        # overlaps only if two accessed nodes are adjacent
        assert rep.accessed_count == 5
        assert rep.exposed_count <= 15
        assert rep.exposed_count >= 11

    def test_chain_random_close_to_three_a(self):
        f = make_chain(1000)
        fracs = [
            detect_random_on(f, 1 / 32, RngStream(5, r)).exposed_fraction for r in range(50)
        ]
        assert np.mean(fracs) == pytest.approx(3 / 32, rel=0.06)

    def test_exposed_at_least_accessed(self):
        f = grow_uniform(500, RngStream(6))
        for A in (0.01, 0.1, 0.5):
            rep = detect_random_on(f, A, RngStream(7))
            assert rep.exposed_count >= rep.accessed_count
            assert rep.exposed_fraction <= 1.0

    def test_accessed_count_rounds_half_up(self):
        f = grow_uniform(10, RngStream(8))
        assert detect_random_on(f, 0.25, RngStream(9)).accessed_count == 3  # 2.5 -> 3
        assert detect_random_on(f, 0.24, RngStream(9)).accessed_count == 2

    def test_ratio_out_of_range(self):
        f = make_chain(10)
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                detect_random_on(f, bad, RngStream(0))
            with pytest.raises(ValueError):
                detect_targeted_on(f, bad, RngStream(0))


class TestStrategyOrdering:
    def test_targeted_beats_random_on_average(self):
        forests = [grow_uniform(3000, RngStream(10, r)) for r in range(30)]
        A = 1 / 32
        rnd = np.mean(
            [detect_random_on(f, A, RngStream(11, r)).exposed_fraction for r, f in enumerate(forests)]
        )
        tgt = np.mean(
            [detect_targeted_on(f, A, RngStream(12, r)).exposed_fraction for r, f in enumerate(forests)]
        )
        assert tgt > rnd

    def test_simulation_below_no_dedup_formulas(self):
        forests = [grow_uniform(3000, RngStream(13, r)) for r in range(30)]
        for A in (1 / 64, 1 / 32, 1 / 16):
            rnd = np.mean(
                [detect_random_on(f, A, RngStream(14, r)).exposed_fraction for r, f in enumerate(forests)]
            )
            tgt = np.mean(
                [detect_targeted_on(f, A, RngStream(15, r)).exposed_fraction for r, f in enumerate(forests)]
            )
            assert rnd <= detect_random(A) + 1e-9
            assert tgt <= detect_targeted(A) + 1e-9


class TestReportCsv:
    def test_schema(self, tmp_path):
        f = make_star(32)
        rep = detect_targeted_on(f, 1 / 32, RngStream(16))
        path = tmp_path / "reports.csv"
        reports_to_csv([(rep, 123)], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "strategy,A,accessed,exposed,fraction,seed"
        fields = lines[1].split(",")
        assert fields[0] == "targeted"
        assert fields[2] == "1"
        assert fields[5] == "123"
