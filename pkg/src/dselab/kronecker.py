"""Koopman-orbit compactness diagnostics over strip windows.

A set's pullback orbit along a strip is probed with greedy epsilon-nets: the
orbit closure is precompact iff finite nets exist at every radius, so a net
size that stops growing as the window widens is evidence of compactness while
linear growth is evidence against.  Verdicts are explicit heuristics over a
finite schedule; the raw profile always ships with the verdict.

Distances are L2 norms of indicator differences, i.e. the square root of the
exact symmetric-difference measure.  Coverage tests compare squared distances
as exact rationals, so no verdict ever hinges on float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .lattice import Direction, LatticePoint, Strip, strip_points
from .measure import MeasurableSet, sym_diff_measure, translate


class Verdict(str, Enum):
    COMPACT_LIKELY = "CompactLikely"
    NONCOMPACT_LIKELY = "NonCompactLikely"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class WindowResult:
    m_lo: int
    m_hi: int
    points: int
    net_size: int


@dataclass(frozen=True)
class NetProfile:
    """Net growth along a widening window schedule, with a compactness verdict.

    slope is the least-squares slope of net size against window index;
    last_half_growth is the net-size increase over the last half of the
    schedule.  Verdict rule: zero last-half growth reads CompactLikely,
    otherwise slope >= 0.5 per window step reads NonCompactLikely, anything
    else stays Inconclusive.
    """

    set_label: str
    strip: Strip
    epsilon: float
    windows: tuple[WindowResult, ...]
    verdict: Verdict
    slope: float
    last_half_growth: int

    @property
    def net_sizes(self) -> tuple[int, ...]:
        return tuple(w.net_size for w in self.windows)


def orbit_distance_sq(sys, b: MeasurableSet, w, u) -> Fraction:
    """Exact squared L2 distance between the two pullback indicators."""
    return sym_diff_measure(sys, translate(sys, b, w), translate(sys, b, u))


def orbit_distance(sys, b: MeasurableSet, w, u) -> float:
    """L2 distance ||U^w 1_B - U^u 1_B||_2 = sqrt(mu of the symmetric difference)."""
    return math.sqrt(float(orbit_distance_sq(sys, b, w, u)))


def greedy_epsilon_net(distances: Sequence[Sequence], epsilon) -> list[int]:
    """Deterministic greedy net over a symmetric zero-diagonal distance matrix.

    Points are scanned in index order; a point joins the net iff no current
    net point lies strictly within epsilon.  The result is within the usual
    covering/packing bracket of the optimal covering number.
    """
    n = len(distances)
    for i in range(n):
        if len(distances[i]) != n:
            raise ValueError("distance matrix must be square")
        if distances[i][i] != 0:
            raise ValueError(f"nonzero diagonal entry at index {i}")
        for j in range(i + 1, n):
            if distances[i][j] != distances[j][i]:
                raise ValueError(f"matrix not symmetric at ({i}, {j})")
    net: list[int] = []
    for i in range(n):
        if not any(distances[i][j] < epsilon for j in net):
            net.append(i)
    return net


class _PairDistanceCache:
    """Squared orbit distances keyed by the lattice difference of the pair.

    Pullback translation is measure preserving, so the distance between the
    pullbacks at w and u depends only on u - w; the reduction is cross-checked
    against the direct computation in the test suite.
    """

    def __init__(self, sys, b: MeasurableSet):
        self.sys = sys
        self.b = b
        self._cache: dict[tuple[int, ...], Fraction] = {}

    def sq(self, w: LatticePoint, u: LatticePoint) -> Fraction:
        diff = tuple(a - c for a, c in zip(u.coords, w.coords))
        hit = self._cache.get(diff)
        if hit is None:
            hit = sym_diff_measure(self.sys, self.b, translate(self.sys, self.b, diff))
            self._cache[diff] = hit
        return hit


def _validate_schedule(schedule: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    windows = [(int(lo), int(hi)) for lo, hi in schedule]
    if len(windows) < 2:
        raise ValueError("window schedule needs at least two windows")
    for lo, hi in windows:
        if lo > hi:
            raise ValueError(f"window [{lo}, {hi}] is empty")
    for (lo1, hi1), (lo2, hi2) in zip(windows, windows[1:]):
        if lo2 > lo1 or hi2 < hi1 or (lo2, hi2) == (lo1, hi1):
            raise ValueError("windows must be strictly increasing and nested")
    return windows


def _fit_slope(sizes: Sequence[int]) -> float:
    n = len(sizes)
    mean_x = (n - 1) / 2
    mean_y = sum(sizes) / n
    denom = sum((i - mean_x) ** 2 for i in range(n))
    return sum((i - mean_x) * (y - mean_y) for i, y in enumerate(sizes)) / denom


def net_growth_profile(
    sys,
    b: MeasurableSet,
    strip: Strip,
    epsilon,
    window_schedule: Sequence[tuple[int, int]],
    *,
    set_label: str = "B",
) -> NetProfile:
    """Greedy net sizes of the pullback orbit over a widening window schedule."""
    windows = _validate_schedule(window_schedule)
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    eps_sq = eps * eps
    pair = _PairDistanceCache(sys, b)
    translate_cache: dict[tuple[int, ...], MeasurableSet] = {}
    results: list[WindowResult] = []
    for lo, hi in windows:
        points = strip_points(strip, lo, hi)
        reps: list[LatticePoint] = []
        seen: set[MeasurableSet] = set()
        for p in points:
            moved = translate_cache.get(p.coords)
            if moved is None:
                moved = translate(sys, b, p)
                translate_cache[p.coords] = moved
            if moved not in seen:
                seen.add(moved)
                reps.append(p)
        net: list[LatticePoint] = []
        for p in reps:
            if not any(pair.sq(p, q) < eps_sq for q in net):
                net.append(p)
        results.append(WindowResult(lo, hi, len(points), len(net)))
    sizes = [r.net_size for r in results]
    half = sizes[len(sizes) // 2 :]
    last_half_growth = max(half) - min(half)
    slope = _fit_slope(sizes)
    if last_half_growth == 0:
        verdict = Verdict.COMPACT_LIKELY
    elif slope >= 0.5:
        verdict = Verdict.NONCOMPACT_LIKELY
    else:
        verdict = Verdict.INCONCLUSIVE
    return NetProfile(
        set_label=set_label,
        strip=strip,
        epsilon=float(eps),
        windows=tuple(results),
        verdict=verdict,
        slope=slope,
        last_half_growth=last_half_growth,
    )


def b_independence_check(
    sys,
    b: MeasurableSet,
    direction: Direction,
    b1,
    b2,
    epsilon,
    window_schedule: Sequence[tuple[int, int]],
    *,
    set_label: str = "B",
) -> bool:
    """Whether the compactness verdict is the same at two strip widths."""
    w1, w2 = Fraction(b1), Fraction(b2)
    if w1 == w2:
        raise ValueError("widths must differ")
    dims = direction.q - 1
    p1 = net_growth_profile(
        sys, b, Strip(direction, (w1,) * dims), epsilon, window_schedule, set_label=set_label
    )
    p2 = net_growth_profile(
        sys, b, Strip(direction, (w2,) * dims), epsilon, window_schedule, set_label=set_label
    )
    return p1.verdict == p2.verdict


# --------------------------------------------------------------------------
# serialization


def profile_csv_rows(profile: NetProfile) -> list[list]:
    rows: list[list] = [["window", "points", "net_size"]]
    for w in profile.windows:
        rows.append([f"{w.m_lo}..{w.m_hi}", w.points, w.net_size])
    return rows


def profile_jsonable(profile: NetProfile) -> dict:
    return {
        "set": profile.set_label,
        "direction": [str(s) for s in profile.strip.direction.slopes],
        "widths": [str(b) for b in profile.strip.widths],
        "epsilon": profile.epsilon,
        "windows": [
            {"m_lo": w.m_lo, "m_hi": w.m_hi, "points": w.points, "net_size": w.net_size}
            for w in profile.windows
        ],
        "verdict": profile.verdict.value,
        "evidence": {
            "slope_per_window": profile.slope,
            "last_half_growth": profile.last_half_growth,
        },
    }
