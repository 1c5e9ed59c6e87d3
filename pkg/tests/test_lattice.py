import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dselab.errors import (
    DimensionMismatchError,
    InfeasibleStripError,
    WidthTooSmallError,
)
from dselab.lattice import (
    Direction,
    SequenceSpec,
    Strip,
    decompose,
    make_strip,
    min_decompose_width,
    monotone_sequence,
    point,
    strip_contains,
    strip_points,
)

F = Fraction


def in_band(slopes, widths, coords) -> bool:
    """Independent membership oracle: direct inequality check."""
    m1 = coords[0]
    for s, b, mi in zip(slopes, widths, coords[1:]):
        if not (s * m1 - F(b) / 2 <= mi <= s * m1 + F(b) / 2):
            return False
    return True


class TestStripContains:
    def test_origin_in_every_strip(self):
        s = make_strip(["0"], ["1"])
        assert strip_contains(s, point(0, 0))

    def test_point_above_band(self):
        s = make_strip(["0"], ["1"])
        assert not strip_contains(s, point(5, 1))

    def test_diagonal_band(self):
        s = make_strip(["1"], ["1"])
        assert strip_contains(s, point(3, 3))

    def test_closed_boundary_included(self):
        # |n - m| = 1/2 = b/2 sits exactly on the boundary and counts as inside
        s = make_strip(["1/2"], ["1"])
        assert strip_contains(s, point(1, 1))
        assert strip_contains(s, point(1, 0))
        assert not strip_contains(s, point(1, 2))

    def test_dimension_mismatch(self):
        s = make_strip(["0"], ["1"])
        with pytest.raises(DimensionMismatchError):
            strip_contains(s, point(0, 0, 0))


class TestStripPoints:
    def test_horizontal_width_one(self):
        s = make_strip(["0"], ["1"])
        assert [p.coords for p in strip_points(s, 0, 2)] == [(0, 0), (1, 0), (2, 0)]

    def test_horizontal_width_four(self):
        s = make_strip(["0"], ["4"])
        assert [p.coords for p in strip_points(s, 0, 0)] == [
            (0, -2),
            (0, -1),
            (0, 0),
            (0, 1),
            (0, 2),
        ]

    def test_half_slope(self):
        s = make_strip(["1/2"], ["1"])
        assert [p.coords for p in strip_points(s, 0, 1)] == [(0, 0), (1, 0), (1, 1)]

    def test_q3_enumeration(self):
        s = make_strip(["0", "1/2"], ["1", "1"])
        assert [p.coords for p in strip_points(s, 0, 1)] == [
            (0, 0, 0),
            (1, 0, 0),
            (1, 0, 1),
        ]

    def test_empty_window_rejected(self):
        s = make_strip(["0"], ["1"])
        with pytest.raises(ValueError):
            strip_points(s, 3, 2)

    @pytest.mark.parametrize(
        "slopes,widths",
        [(["0"], ["1"]), (["1"], ["3"]), (["-2/3"], ["5/2"]), (["1/2", "-1/3"], ["1", "2"])],
    )
    def test_matches_bounding_box_scan(self, slopes, widths):
        s = make_strip(slopes, widths)
        got = {p.coords for p in strip_points(s, -6, 6)}
        # brute-force oracle over a box guaranteed to contain the band
        slf = [F(x) for x in slopes]
        expected = set()
        for m1 in range(-6, 7):
            boxes = []
            for sl, b in zip(slf, widths):
                c = sl * m1
                boxes.append(range(math.floor(c) - 8, math.floor(c) + 9))
            rest_dims = len(slf)
            def walk(prefix, dims):
                if dims == rest_dims:
                    if in_band(slf, widths, (m1, *prefix)):
                        expected.add((m1, *prefix))
                    return
                for v in boxes[dims]:
                    walk(prefix + (v,), dims + 1)
            walk((), 0)
        assert got == expected

    def test_every_enumerated_point_is_member(self):
        s = make_strip(["2/3"], ["7/3"])
        for p in strip_points(s, -10, 10):
            assert strip_contains(s, p)


class TestMonotoneSequence:
    def test_horizontal(self):
        s = make_strip(["0"], ["1"])
        seq = monotone_sequence(s, count=3, stride=1, start_m=1)
        assert [p.coords for p in seq.points] == [(1, 0), (2, 0), (3, 0)]

    def test_diagonal_stride_two(self):
        # first coordinates run start_m, start_m+stride, ...
        s = make_strip(["1"], ["1"])
        seq = monotone_sequence(s, count=3, stride=2, start_m=0)
        assert [p.coords for p in seq.points] == [(0, 0), (2, 2), (4, 4)]

    def test_half_slope_tie_rounds_down(self):
        s = make_strip(["1/2"], ["1"])
        seq = monotone_sequence(s, count=2, stride=1, start_m=1)
        assert [p.coords for p in seq.points] == [(1, 0), (2, 1)]

    def test_all_points_inside_strip(self):
        s = make_strip(["-3/7"], ["1"])
        seq = monotone_sequence(s, count=40, stride=3, start_m=-11)
        for p in seq.points:
            assert strip_contains(s, p)

    def test_infeasible_point_names_m(self):
        # width 1/2, slope 1/2: at m=1 the band [1/4, 3/4] holds no integer
        s = make_strip(["1/2"], ["1/2"])
        with pytest.raises(InfeasibleStripError) as exc:
            monotone_sequence(s, count=3, stride=1, start_m=0)
        assert exc.value.m == 1

    def test_count_must_be_positive(self):
        s = make_strip(["0"], ["1"])
        with pytest.raises(ValueError):
            monotone_sequence(s, count=0)


class TestSequenceSpec:
    def test_monotonicity_required_inside_strip(self):
        s = make_strip(["0"], ["1"])
        with pytest.raises(ValueError):
            SequenceSpec((point(1, 0), point(1, 0)), strip=s)

    def test_decreasing_first_coords_allowed(self):
        s = make_strip(["0"], ["1"])
        spec = SequenceSpec((point(3, 0), point(1, 0), point(0, 0)), strip=s)
        assert len(spec) == 3

    def test_membership_required_inside_strip(self):
        s = make_strip(["0"], ["1"])
        with pytest.raises(ValueError):
            SequenceSpec((point(0, 0), point(1, 5)), strip=s)

    def test_free_sequence_allows_constant_first_coord(self):
        spec = SequenceSpec(tuple(point(0, n) for n in range(1, 5)))
        assert len(spec) == 4


class TestDecompose:
    def test_zero_splits_as_zero(self):
        v, w = Direction.of("0"), Direction.of("1")
        p1, p2 = decompose(point(0, 0), v, w, 9)
        assert p1.coords == (0, 0) and p2.coords == (0, 0)

    def test_worked_point(self):
        v, w = Direction.of("0"), Direction.of("1")
        p1, p2 = decompose(point(5, 3), v, w, 9)
        assert (p1 + p2).coords == (5, 3)
        assert strip_contains(Strip(v, (F(9),)), p1)
        assert strip_contains(Strip(w, (F(9),)), p2)
        # canonical deterministic output
        assert p1.coords == (2, 0) and p2.coords == (3, 3)

    def test_width_bound_is_exclusive(self):
        v, w = Direction.of("0"), Direction.of("1")
        assert min_decompose_width(v, w) == 8
        with pytest.raises(WidthTooSmallError) as exc:
            decompose(point(5, 3), v, w, 8)
        assert exc.value.min_width == 8
        decompose(point(5, 3), v, w, F("17/2"))

    def test_equal_slopes_rejected(self):
        v = Direction.of("1/2")
        with pytest.raises(ValueError):
            decompose(point(1, 1), v, Direction.of("1/2"), 20)

    @pytest.mark.parametrize(
        "s1,s2",
        [("0", "1"), ("1/2", "-1/2"), ("2", "-1/3"), ("5/3", "1/7")],
    )
    def test_grid_decomposes_exactly(self, s1, s2):
        v, w = Direction.of(s1), Direction.of(s2)
        b = min_decompose_width(v, w) + 1
        sv, sw = Strip(v, (b,)), Strip(w, (b,))
        for m in range(-12, 13):
            for n in range(-12, 13):
                p = point(m, n)
                p1, p2 = decompose(p, v, w, b)
                assert (p1 + p2).coords == p.coords
                assert strip_contains(sv, p1)
                assert strip_contains(sw, p2)

    @given(
        m=st.integers(-10**6, 10**6),
        n=st.integers(-10**6, 10**6),
        num1=st.integers(-8, 8),
        den1=st.integers(1, 8),
        num2=st.integers(-8, 8),
        den2=st.integers(1, 8),
    )
    @settings(max_examples=120, deadline=None)
    def test_decompose_property(self, m, n, num1, den1, num2, den2):
        b1, b2 = F(num1, den1), F(num2, den2)
        if b1 == b2:
            return
        v, w = Direction.of(b1), Direction.of(b2)
        b = min_decompose_width(v, w) + F(1, 3)
        p1, p2 = decompose(point(m, n), v, w, b)
        assert (p1 + p2).coords == (m, n)
        assert strip_contains(Strip(v, (b,)), p1)
        assert strip_contains(Strip(w, (b,)), p2)

    def test_determinism(self):
        v, w = Direction.of("1/3"), Direction.of("-4/5")
        b = min_decompose_width(v, w) + 2
        first = decompose(point(17, -40), v, w, b)
        for _ in range(3):
            assert decompose(point(17, -40), v, w, b) == first


class TestTypes:
    def test_direction_needs_all_slopes(self):
        with pytest.raises(DimensionMismatchError):
            Direction(q=3, slopes=(F(1),))

    def test_strip_width_positive(self):
        with pytest.raises(ValueError):
            make_strip(["0"], ["0"])

    def test_point_arithmetic_checks_dimension(self):
        with pytest.raises(DimensionMismatchError):
            point(1, 2) + point(1, 2, 3)
