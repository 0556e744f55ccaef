"""Closed-form approximations and detection formulas."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wormtree.analytic import generation_dist, harmonic, joint_table
from wormtree.approx import (
    DetectionParams,
    countermeasure_children,
    detect_random,
    detect_targeted,
    detect_targeted_capped,
    geometric_children,
    joint_approx,
    poisson_generation,
)


class TestGeometricChildren:
    def test_values(self):
        assert geometric_children(0) == 0.5
        assert geometric_children(1) == 0.25

    def test_five_or_fewer_children_covers_most_nodes(self):
        assert sum(geometric_children(i) for i in range(6)) == pytest.approx(0.984375)

    def test_partial_sums(self):
        for k in range(12):
            total = sum(geometric_children(i) for i in range(k + 1))
            assert total == pytest.approx(1.0 - 0.5 ** (k + 1), abs=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            geometric_children(-1)


class TestPoissonGeneration:
    def test_degenerate(self):
        assert poisson_generation(0.0, 0) == 1.0
        assert poisson_generation(0.0, 3) == 0.0

    def test_unit_rate(self):
        assert poisson_generation(1.0, 1) == pytest.approx(math.exp(-1.0))

    def test_matches_generation_dist(self):
        lam = harmonic(2000) - 1.0
        exact = generation_dist(2000, j_max=60).mass
        approx = np.array([poisson_generation(lam, j) for j in range(61)])
        assert np.max(np.abs(exact - approx)) < 0.01

    @pytest.mark.parametrize("lam", [3.0, 9.5, 40.0, 200.0])
    def test_sums_to_one(self, lam):
        width = int(lam + 12 * math.sqrt(lam)) + 1
        total = math.fsum(poisson_generation(lam, j) for j in range(width))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_sums_to_one_small_rate(self):
        # tails of low-rate Poissons are relatively fat; give them more room
        total = math.fsum(poisson_generation(0.5, j) for j in range(30))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_large_j_does_not_overflow(self):
        assert poisson_generation(200.0, 500) > 0.0

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            poisson_generation(-0.1, 0)


class TestJointApprox:
    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=100000),
        i=st.integers(min_value=0, max_value=30),
        j=st.integers(min_value=0, max_value=40),
    )
    def test_product_identity(self, n, i, j):
        lam = harmonic(n) - 1.0
        assert joint_approx(n, i, j) == geometric_children(i) * poisson_generation(lam, j)

    def test_plugin_value(self):
        assert joint_approx(2, 0, 0) == pytest.approx(0.5 * math.exp(-0.5))

    def test_parity_against_recursion(self):
        # frozen first-computation baselines: at n=2000 over the (30, 30)
        # window, 92.0% of total mass sits within x1.5 of the product form,
        # 70.6% of cells holding >= 1e-3 sit within x1.5 (86.8% within x2),
        # and the window-wide total variation is 0.0946
        t = joint_table(2000, i_max=30, j_max=30)
        exact = t.p
        approx = np.array([[joint_approx(2000, i, j) for j in range(31)] for i in range(31)])
        ratio = np.divide(approx, exact, out=np.full_like(exact, np.inf), where=exact > 0)

        near = (ratio >= 1 / 1.5) & (ratio <= 1.5)
        assert exact[near].sum() >= 0.90

        cells = exact >= 1e-3
        assert cells.sum() > 50
        assert np.mean(near[cells]) >= 0.65
        within2 = (ratio >= 0.5) & (ratio <= 2.0)
        assert np.mean(within2[cells]) >= 0.80

        assert 0.5 * np.abs(exact - approx).sum() < 0.12

    def test_rejects_single_node(self):
        with pytest.raises(ValueError):
            joint_approx(1, 0, 0)


class TestDetectionFormulas:
    def test_worked_examples(self):
        assert detect_random(1 / 64) == pytest.approx(0.046875, abs=0)
        assert detect_targeted(1 / 64) == pytest.approx(9 / 64, abs=1e-15)
        assert detect_targeted(1 / 32) == pytest.approx(0.25, abs=1e-15)
        assert detect_random(0.0) == 0.0

    def test_targeted_advantage_identity(self):
        for A in (1 / 64, 1 / 32, 1 / 16, 0.1, 0.05):
            gap = detect_targeted(A) - detect_random(A)
            assert gap == pytest.approx(-A * math.log2(A), abs=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(A=st.floats(min_value=1e-6, max_value=0.125))
    def test_targeted_beats_random(self, A):
        assert detect_targeted(A) >= detect_random(A)

    def test_range_errors(self):
        with pytest.raises(ValueError):
            detect_random(1.2)
        with pytest.raises(ValueError):
            detect_random(-0.1)
        with pytest.raises(ValueError):
            detect_targeted(0.0)


class TestCountermeasure:
    def test_capped_tail(self):
        assert countermeasure_children(3, 3) == 0.125
        assert countermeasure_children(3, 4) == 0.0
        assert countermeasure_children(1, 0) == 0.5
        assert countermeasure_children(1, 1) == 0.5

    @pytest.mark.parametrize("m", range(1, 12))
    def test_sums_to_one(self, m):
        assert math.fsum(countermeasure_children(m, i) for i in range(m + 2)) == 1.0

    def test_capped_detection_example(self):
        assert detect_targeted_capped(3, 1 / 64) == pytest.approx(5 / 64, abs=0)

    @pytest.mark.parametrize("m", range(1, 10))
    def test_branches_agree_at_breakpoint(self, m):
        A = 0.5**m
        assert detect_targeted_capped(m, A) == pytest.approx((m + 2) * A, abs=1e-15)
        assert detect_targeted(A) - 0.5**m == pytest.approx((m + 2) * A, abs=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(
        m=st.integers(min_value=1, max_value=20),
        A=st.floats(min_value=1e-6, max_value=1.0, exclude_max=False),
    )
    def test_cap_never_helps_the_defender(self, m, A):
        assert detect_targeted_capped(m, A) <= detect_targeted(A) + 1e-15

    @settings(max_examples=60, deadline=None)
    @given(m=st.integers(min_value=1, max_value=20), A=st.floats(min_value=1e-6, max_value=1.0))
    def test_monotone_in_cap(self, m, A):
        assert detect_targeted_capped(m + 1, A) >= detect_targeted_capped(m, A) - 1e-15

    def test_continuity_in_A(self):
        for m in (1, 2, 3, 5, 8):
            b = 0.5**m
            eps = 1e-9
            below = detect_targeted_capped(m, b - eps)
            above = detect_targeted_capped(m, b + eps)
            assert abs(above - below) < 1e-7


class TestDetectionParams:
    def test_depth_is_log2(self):
        assert DetectionParams(accessed_ratio=1 / 64).depth == pytest.approx(6.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            DetectionParams(accessed_ratio=0.0)
        with pytest.raises(ValueError):
            DetectionParams(accessed_ratio=0.5, max_children=0)
