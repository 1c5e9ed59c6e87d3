import math
from fractions import Fraction

import pytest

from dselab.errors import ForeignSetError
from dselab.measure import arc_set, cylinder, partition_entropy, set_measure, translate
from dselab.systems import (
    SystemKind,
    arc_partition,
    make_bernoulli_shift,
    make_identity_shift,
    make_rotation_action,
    time_zero_partition,
)

F = Fraction


class TestConstructors:
    def test_fair_bernoulli(self):
        sys = make_bernoulli_shift(2, ["1/2", "1/2"])
        assert set_measure(sys, cylinder(sys, {(0, 0): 0})) == F(1, 2)

    def test_biased_entropy_values(self):
        sys = make_bernoulli_shift(2, ["1/3", "2/3"])
        alpha = time_zero_partition(sys)
        assert [set_measure(sys, s) for s in alpha.sets] == [F(1, 3), F(2, 3)]
        expected = math.log(3) - F(2, 3) * math.log(2)
        assert partition_entropy(sys, alpha) == pytest.approx(expected, abs=1e-14)

    def test_z3_shift(self):
        sys = make_bernoulli_shift(3, ["1/2", "1/2"])
        assert sys.q == 3 and sys.index_dim == 3
        a = cylinder(sys, {(0, 0, 0): 1})
        assert set_measure(sys, translate(sys, a, (1, 2, 3))) == F(1, 2)

    @pytest.mark.parametrize(
        "probs", [["1/2", "1/3"], ["0", "1"], ["-1/2", "3/2"], ["1"]]
    )
    def test_invalid_probability_vectors(self, probs):
        with pytest.raises(ValueError):
            make_bernoulli_shift(2, probs)

    def test_invalid_angles(self):
        with pytest.raises(ValueError):
            make_rotation_action(2, ["1/3", "7/6"])
        with pytest.raises(ValueError):
            make_rotation_action(2, ["1/3"])


class TestIdentityShift:
    def test_first_generator_acts_trivially(self):
        sys = make_identity_shift()
        a = cylinder(sys, {0: 0})
        assert translate(sys, a, (7, 0)) == a

    def test_second_generator_shifts(self):
        sys = make_identity_shift()
        a = cylinder(sys, {0: 0})
        assert translate(sys, a, (0, 3)) == cylinder(sys, {3: 0})

    def test_time_zero_cells_have_measure_half(self):
        sys = make_identity_shift()
        alpha = time_zero_partition(sys)
        assert len(alpha) == 2
        assert all(set_measure(sys, s) == F(1, 2) for s in alpha.sets)

    def test_translate_depends_only_on_second_coordinate(self):
        sys = make_identity_shift()
        a = cylinder(sys, {2: 1, -1: 0})
        for m in (-3, 0, 5):
            assert translate(sys, a, (m, 4)) == translate(sys, a, (0, 4))


class TestRotation:
    def test_example_offset(self):
        sys = make_rotation_action(2, ["1/3", "1/7"])
        a = arc_set(sys, [("0", "1/2")])
        moved = translate(sys, a, (1, 1))
        assert moved.arcs == ((F(10, 21), F(41, 42)),)

    def test_zero_element_is_identity(self):
        sys = make_rotation_action(2, ["13/21", "5/8"])
        a = arc_set(sys, [("1/5", "2/5"), ("1/2", "9/10")])
        assert translate(sys, a, (0, 0)) == a

    def test_measure_preserved_with_wraparound(self):
        sys = make_rotation_action(2, ["13/21", "5/8"])
        a = arc_set(sys, [("3/4", "1")])
        for w in [(1, 0), (0, 1), (2, 3), (-1, 5)]:
            assert set_measure(sys, translate(sys, a, w)) == set_measure(sys, a)

    def test_offset_is_additive_mod_one(self):
        sys = make_rotation_action(2, ["13/21", "5/8"])
        for w in [(1, 2), (-3, 1)]:
            for u in [(0, 4), (2, -2)]:
                combined = sys.rotation_offset(tuple(a + b for a, b in zip(w, u)))
                split = sys.rotation_offset(w) + sys.rotation_offset(u)
                assert combined == split - (split // 1)


class TestPartitionFactories:
    def test_arc_partition_basic(self):
        sys = make_rotation_action(2, ["1/3", "1/7"])
        p = arc_partition(sys, ["0", "1/2"])
        assert [s.arcs for s in p.sets] == [
            ((F(0), F(1, 2)),),
            ((F(1, 2), F(1)),),
        ]

    def test_arc_partition_wraps(self):
        sys = make_rotation_action(2, ["1/3", "1/7"])
        p = arc_partition(sys, ["1/4", "3/4"])
        assert set_measure(sys, p.sets[0]) == F(1, 2)
        assert p.sets[1].arcs == ((F(0), F(1, 4)), (F(3, 4), F(1)))

    def test_arc_partition_needs_sorted_cuts(self):
        sys = make_rotation_action(2, ["1/3", "1/7"])
        with pytest.raises(ValueError):
            arc_partition(sys, ["1/2", "1/4"])

    def test_time_zero_on_rotation_rejected(self):
        sys = make_rotation_action(2, ["1/3", "1/7"])
        with pytest.raises(ValueError):
            time_zero_partition(sys)


class TestSystemIdentity:
    def test_tags_distinguish_systems(self):
        s1 = make_bernoulli_shift(2, ["1/2", "1/2"])
        s2 = make_identity_shift()
        s3 = make_rotation_action(2, ["1/3", "1/7"])
        assert len({s1.tag, s2.tag, s3.tag}) == 3
        assert s1.kind == SystemKind.BERNOULLI

    def test_foreign_sets_rejected(self):
        s1 = make_bernoulli_shift(2, ["1/2", "1/2"])
        s2 = make_identity_shift()
        a = cylinder(s2, {0: 0})
        with pytest.raises(ForeignSetError):
            set_measure(s1, a)
