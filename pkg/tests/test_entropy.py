import math
import random
from fractions import Fraction

import pytest

from dselab.errors import InfeasibleStripError, RefinementError
from dselab.entropy import (
    curve_csv_rows,
    curve_jsonable,
    estimate_limsup,
    greedy_directional_sequence,
    refinement_scan,
    sequence_entropy_curve,
    try_factorize,
)
from dselab.lattice import SequenceSpec, make_strip, monotone_sequence, point
from dselab.measure import cylinder, join, make_partition, trivial_partition
from dselab.systems import (
    arc_partition,
    make_bernoulli_shift,
    make_identity_shift,
    make_rotation_action,
    time_zero_partition,
)

F = Fraction
LOG2 = math.log(2)


def vertical_sequence(k):
    return SequenceSpec(tuple(point(0, n) for n in range(1, k + 1)))


@pytest.fixture
def fair():
    return make_bernoulli_shift(2, ["1/2", "1/2"])


@pytest.fixture
def idshift():
    return make_identity_shift()


@pytest.fixture
def rot():
    return make_rotation_action(2, ["13/21", "5/8"])


class TestFactorization:
    def test_time_zero_factors(self, fair):
        factors = try_factorize(fair, time_zero_partition(fair))
        assert factors == {(0, 0): (frozenset({0}), frozenset({1}))}

    def test_product_of_two_coordinates_factors(self, fair):
        alpha = time_zero_partition(fair)
        eta = make_partition(
            fair,
            [("0", cylinder(fair, {(1, 0): 0})), ("1", cylinder(fair, {(1, 0): 1}))],
        )
        factors = try_factorize(fair, join(alpha, eta))
        assert factors is not None and set(factors) == {(0, 0), (1, 0)}

    def test_coarsened_product_does_not_factor(self, fair):
        cells = [
            ("a", cylinder(fair, {(0, 0): 0, (1, 0): 0})),
            ("b", cylinder(fair, {(0, 0): 0, (1, 0): 1})),
            ("c", cylinder(fair, {(0, 0): 1})),
        ]
        assert try_factorize(fair, make_partition(fair, cells)) is None

    def test_rotation_never_factors(self, rot):
        assert try_factorize(rot, arc_partition(rot, ["0", "1/2"])) is None

    def test_forcing_factorized_on_nonproduct_raises(self, fair):
        cells = [
            ("a", cylinder(fair, {(0, 0): 0, (1, 0): 0})),
            ("b", cylinder(fair, {(0, 0): 0, (1, 0): 1})),
            ("c", cylinder(fair, {(0, 0): 1})),
        ]
        alpha = make_partition(fair, cells)
        with pytest.raises(ValueError):
            sequence_entropy_curve(fair, alpha, vertical_sequence(3), method="factorized")


class TestSequenceEntropyCurve:
    def test_identity_shift_vertical_is_log2_average(self, idshift):
        alpha = time_zero_partition(idshift)
        curve = sequence_entropy_curve(idshift, alpha, vertical_sequence(12))
        for s in curve.samples:
            assert abs(s.average - LOG2) < 1e-13
            assert abs(s.increment - LOG2) < 1e-13

    def test_identity_shift_horizontal_strip_is_flat(self, idshift):
        alpha = time_zero_partition(idshift)
        strip = make_strip(["0"], ["1"])
        seq = SequenceSpec(tuple(point(m, 0) for m in range(1, 21)), strip=strip)
        curve = sequence_entropy_curve(idshift, alpha, seq)
        for s in curve.samples:
            assert abs(s.joint - LOG2) < 1e-13
            assert abs(s.average - LOG2 / s.k) < 1e-13

    def test_bernoulli_distinct_points_max_out(self, fair):
        alpha = time_zero_partition(fair)
        pts = [point(3, -1), point(5, 2), point(6, 2), point(9, -4), point(12, 0)]
        curve = sequence_entropy_curve(fair, alpha, SequenceSpec(tuple(pts)))
        for s in curve.samples:
            assert abs(s.average - LOG2) < 1e-13

    def test_paths_agree_exactly_small_k(self, fair, idshift):
        rng = random.Random(3)
        for sys in (fair, idshift, make_bernoulli_shift(2, ["1/6", "1/3", "1/2"])):
            alpha = time_zero_partition(sys)
            pts = []
            seen = set()
            while len(pts) < 8:
                p = (rng.randint(-3, 3), rng.randint(-3, 3))
                if p not in seen:
                    seen.add(p)
                    pts.append(point(*p))
            seq = SequenceSpec(tuple(pts))
            fast = sequence_entropy_curve(sys, alpha, seq, method="factorized")
            slow = sequence_entropy_curve(sys, alpha, seq, method="explicit")
            for a, b in zip(fast.samples, slow.samples):
                assert abs(a.joint - b.joint) < 1e-12
                assert abs(a.increment - b.increment) < 1e-12

    def test_joint_equals_sum_of_increments(self, rot):
        alpha = arc_partition(rot, ["0", "1/2"])
        seq = SequenceSpec(tuple(point(m, m) for m in range(1, 15)))
        curve = sequence_entropy_curve(rot, alpha, seq)
        running = 0.0
        for s in curve.samples:
            running += s.increment
            assert s.joint == running
            assert s.increment >= 0.0

    def test_prefix_permutation_invariance(self, fair, rot):
        for sys, alpha in (
            (fair, time_zero_partition(fair)),
            (rot, arc_partition(rot, ["0", "1/3", "2/3"])),
        ):
            pts = [point(1, 0), point(2, 1), point(3, -1), point(4, 4), point(5, 2)]
            h1 = sequence_entropy_curve(sys, alpha, SequenceSpec(tuple(pts))).samples[-1].joint
            rng = random.Random(11)
            for _ in range(3):
                shuffled = pts[:]
                rng.shuffle(shuffled)
                h2 = sequence_entropy_curve(sys, alpha, SequenceSpec(tuple(shuffled))).samples[-1].joint
                assert abs(h1 - h2) < 1e-12

    def test_cell_cap_truncates_with_marker(self, fair):
        alpha = time_zero_partition(fair)
        curve = sequence_entropy_curve(
            fair, alpha, vertical_sequence(6), cell_cap=8, method="explicit"
        )
        assert curve.truncated
        assert curve.truncated_at == 4
        assert len(curve.samples) == 3

    def test_three_dimensional_lattice(self):
        sys = make_bernoulli_shift(3, ["1/2", "1/2"])
        alpha = time_zero_partition(sys)
        strip = make_strip(["0", "1/2"], ["1", "1"])
        seq = monotone_sequence(strip, count=10, stride=1, start_m=1)
        fast = sequence_entropy_curve(sys, alpha, seq, method="factorized")
        slow = sequence_entropy_curve(sys, alpha, seq, method="explicit")
        for a, b in zip(fast.samples, slow.samples):
            assert abs(a.average - LOG2) < 1e-13
            assert abs(a.joint - b.joint) < 1e-12

    def test_monotone_nondecreasing_joint(self, rot):
        alpha = arc_partition(rot, ["0", "1/4", "1/2"])
        seq = SequenceSpec(tuple(point(m, 0) for m in range(1, 30)))
        curve = sequence_entropy_curve(rot, alpha, seq)
        joints = [s.joint for s in curve.samples]
        assert all(b >= a - 1e-15 for a, b in zip(joints, joints[1:]))


class TestEstimateLimsup:
    def test_constant_curve(self, idshift):
        alpha = time_zero_partition(idshift)
        curve = sequence_entropy_curve(idshift, alpha, vertical_sequence(16))
        est = estimate_limsup(curve, tail=8)
        assert abs(est.value - LOG2) < 1e-13
        assert abs(est.slope) < 1e-13

    def test_decaying_curve_reports_negative_slope(self, idshift):
        alpha = time_zero_partition(idshift)
        strip = make_strip(["0"], ["1"])
        seq = SequenceSpec(tuple(point(m, 0) for m in range(1, 33)), strip=strip)
        curve = sequence_entropy_curve(idshift, alpha, seq)
        est = estimate_limsup(curve, tail=16)
        assert est.value == pytest.approx(LOG2 / 17, abs=1e-13)
        assert est.slope < 0
        assert est.last == pytest.approx(LOG2 / 32, abs=1e-13)

    def test_bad_tail_rejected(self, idshift):
        alpha = time_zero_partition(idshift)
        curve = sequence_entropy_curve(idshift, alpha, vertical_sequence(4))
        with pytest.raises(ValueError):
            estimate_limsup(curve, tail=0)
        with pytest.raises(ValueError):
            estimate_limsup(curve, tail=5)


class TestGreedy:
    def test_bernoulli_diagonal_attains_log2(self, fair):
        alpha = time_zero_partition(fair)
        seq, curve = greedy_directional_sequence(
            fair, alpha, make_strip(["1"], ["1"]), horizon=12
        )
        assert [p.coords for p in seq.points] == [(m, m) for m in range(1, 13)]
        for s in curve.samples:
            assert abs(s.increment - LOG2) < 1e-13
            assert abs(s.average - LOG2) < 1e-13

    def test_rotation_respects_cell_count_bound(self, rot):
        alpha = arc_partition(rot, ["0", "1/2"])
        _, curve = greedy_directional_sequence(
            rot, alpha, make_strip(["1"], ["1"]), horizon=20
        )
        for s in curve.samples:
            assert s.average <= math.log(2 * s.k) / s.k + 1e-12

    def test_identity_shift_horizontal_increments_vanish(self, idshift):
        alpha = time_zero_partition(idshift)
        _, curve = greedy_directional_sequence(
            idshift, alpha, make_strip(["0"], ["1"]), horizon=12, window=5
        )
        assert abs(curve.samples[0].increment - LOG2) < 1e-13
        for s in curve.samples[1:]:
            assert s.increment == 0.0
        # ties break to the lexicographically smallest candidate
        assert [p.coords[0] for p in curve.sequence.points] == list(range(1, 13))

    def test_empty_window_raises(self, idshift):
        alpha = time_zero_partition(idshift)
        narrow = make_strip(["1/2"], ["1/2"])
        with pytest.raises(InfeasibleStripError):
            greedy_directional_sequence(idshift, alpha, narrow, horizon=4, window=1)


class TestRefinementScan:
    def test_bernoulli_chain(self, fair):
        chain = []
        current = time_zero_partition(fair)
        chain.append(current)
        for n in (1, 2):
            nxt = make_partition(
                fair,
                [("0", cylinder(fair, {(0, n): 0})), ("1", cylinder(fair, {(0, n): 1}))],
            )
            current = join(current, nxt)
            chain.append(current)
        seq = SequenceSpec(tuple(point(k, k) for k in range(1, 7)))
        result = refinement_scan(fair, chain, seq)
        for n, (idx, est) in enumerate(result, start=1):
            assert idx == n - 1
            assert est.value == pytest.approx(n * LOG2, abs=1e-12)

    def test_rotation_estimates_shrink_with_horizon(self, rot):
        parts = [
            arc_partition(rot, [F(i, 2**n) for i in range(2**n)]) for n in (1, 2, 3)
        ]
        seq = SequenceSpec(tuple(point(m, 0) for m in range(1, 41)), strip=make_strip(["0"], ["1"]))
        result = refinement_scan(rot, parts, seq)
        for n, (_, est) in zip((1, 2, 3), result):
            assert est.value <= math.log(2**n * 40) / 20 + 1e-12

    def test_trivial_partition_scores_zero(self, fair):
        result = refinement_scan(fair, [trivial_partition(fair)], vertical_sequence(5))
        assert result[0][1].value == 0.0

    def test_refinement_violation_detected(self, fair):
        alpha = time_zero_partition(fair)
        beta = make_partition(
            fair,
            [("0", cylinder(fair, {(1, 0): 0})), ("1", cylinder(fair, {(1, 0): 1}))],
        )
        with pytest.raises(RefinementError):
            refinement_scan(fair, [alpha, beta], vertical_sequence(4))


class TestSerialization:
    def test_csv_rows(self, idshift):
        alpha = time_zero_partition(idshift)
        curve = sequence_entropy_curve(idshift, alpha, vertical_sequence(4))
        rows = curve_csv_rows(curve)
        assert rows[0] == ["k", "joint", "average", "increment", "m1", "m2"]
        assert len(rows) == 5
        assert rows[1][0] == 1

    def test_jsonable(self, idshift):
        alpha = time_zero_partition(idshift)
        curve = sequence_entropy_curve(idshift, alpha, vertical_sequence(3))
        payload = curve_jsonable(curve)
        assert payload["truncated_at"] is None
        assert [s["k"] for s in payload["samples"]] == [1, 2, 3]
        assert payload["samples"][0]["point"] == [0, 1]
