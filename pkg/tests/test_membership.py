"""Membership function semantics: shapes, edges, and degenerate breakpoints."""
import math

import pytest
from hypothesis import given, strategies as st

from regfuzz.fis import (
    Trapezoidal,
    Triangular,
    ValidationError,
    fuzzify,
    membership_degree,
    midpoint_grid,
)


class TestTriangular:
    def test_peak_is_one(self):
        assert membership_degree(Triangular(0.0, 5.0, 10.0), 5.0) == 1.0

    def test_feet_are_zero(self):
        tri = Triangular(0.0, 5.0, 10.0)
        assert membership_degree(tri, 0.0) == 0.0
        assert membership_degree(tri, 10.0) == 0.0

    def test_outside_support(self):
        tri = Triangular(0.0, 5.0, 10.0)
        assert membership_degree(tri, -3.0) == 0.0
        assert membership_degree(tri, 11.0) == 0.0

    def test_linear_ramps(self):
        tri = Triangular(0.0, 5.0, 10.0)
        assert membership_degree(tri, 2.5) == pytest.approx(0.5)
        assert membership_degree(tri, 7.5) == pytest.approx(0.5)

    def test_asymmetric(self):
        tri = Triangular(0.0, 2.0, 10.0)
        assert membership_degree(tri, 1.0) == pytest.approx(0.5)
        assert membership_degree(tri, 6.0) == pytest.approx(0.5)

    def test_vertical_left_edge(self):
        # a == b: the rise is a step, so the peak still reads 1
        tri = Triangular(0.0, 0.0, 10.0)
        assert membership_degree(tri, 0.0) == 1.0
        assert membership_degree(tri, 5.0) == pytest.approx(0.5)
        assert membership_degree(tri, -0.1) == 0.0

    def test_vertical_right_edge(self):
        tri = Triangular(0.0, 10.0, 10.0)
        assert membership_degree(tri, 10.0) == 1.0
        assert membership_degree(tri, 5.0) == pytest.approx(0.5)
        assert membership_degree(tri, 10.1) == 0.0

    def test_ordering_enforced(self):
        with pytest.raises(ValidationError):
            Triangular(5.0, 4.0, 10.0)
        with pytest.raises(ValidationError):
            Triangular(0.0, 6.0, 5.0)

    def test_breakpoints_and_peak(self):
        tri = Triangular(1.0, 2.0, 3.0)
        assert tri.breakpoints == (1.0, 2.0, 3.0)
        assert tri.peak == 2.0


class TestTrapezoidal:
    def test_plateau(self):
        trap = Trapezoidal(0.0, 2.0, 8.0, 10.0)
        for x in (2.0, 5.0, 8.0):
            assert membership_degree(trap, x) == 1.0

    def test_ramps(self):
        trap = Trapezoidal(0.0, 2.0, 8.0, 10.0)
        assert membership_degree(trap, 1.0) == pytest.approx(0.5)
        assert membership_degree(trap, 9.0) == pytest.approx(0.5)

    def test_outside(self):
        trap = Trapezoidal(0.0, 2.0, 8.0, 10.0)
        assert membership_degree(trap, -1.0) == 0.0
        assert membership_degree(trap, 11.0) == 0.0

    def test_vertical_edges_plateau_wins(self):
        # a == b and c == d: the boundary points belong to the plateau
        trap = Trapezoidal(0.7, 0.7, 1.0, 1.0)
        assert membership_degree(trap, 0.7) == 1.0
        assert membership_degree(trap, 1.0) == 1.0
        assert membership_degree(trap, 0.85) == 1.0
        assert membership_degree(trap, 0.69) == 0.0
        assert membership_degree(trap, 1.01) == 0.0

    def test_ordering_enforced(self):
        with pytest.raises(ValidationError):
            Trapezoidal(0.0, 3.0, 2.0, 10.0)

    def test_peak_is_plateau_midpoint(self):
        assert Trapezoidal(0.0, 2.0, 8.0, 10.0).peak == 5.0


@given(
    x=st.floats(-50, 50),
    a=st.floats(-20, 0),
    b=st.floats(0.001, 10),
    c=st.floats(10.001, 30),
)
def test_triangular_degree_bounded(x, a, b, c):
    d = membership_degree(Triangular(a, b, c), x)
    assert 0.0 <= d <= 1.0
    assert math.isfinite(d)


@given(
    x=st.floats(-50, 50),
    a=st.floats(-20, 0),
    b=st.floats(0.001, 10),
    c=st.floats(10.001, 20),
    d=st.floats(20.001, 40),
)
def test_trapezoidal_degree_bounded(x, a, b, c, d):
    v = membership_degree(Trapezoidal(a, b, c, d), x)
    assert 0.0 <= v <= 1.0


def test_fuzzify_partition_of_unity(two_term_var):
    degrees = fuzzify(two_term_var, 2.0)
    assert degrees == {"Small": 0.8, "Large": 0.2}


def test_fuzzify_covers_all_terms(two_term_var):
    assert set(fuzzify(two_term_var, 7.3)) == {"Small", "Large"}


class TestMidpointGrid:
    def test_five_points(self):
        grid = midpoint_grid(0.0, 100.0, 5)
        assert list(grid) == [10.0, 30.0, 50.0, 70.0, 90.0]

    def test_endpoints_excluded(self):
        grid = midpoint_grid(0.0, 1.0, 1001)
        assert grid[0] > 0.0 and grid[-1] < 1.0
        assert len(grid) == 1001

    def test_uniform_spacing(self):
        grid = midpoint_grid(-5.0, 5.0, 11)
        steps = grid[1:] - grid[:-1]
        assert steps == pytest.approx([10.0 / 11] * 10)
